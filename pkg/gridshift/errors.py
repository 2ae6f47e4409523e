"""
Exception hierarchy shared by all services.

Library code raises these; only the command-line entry point turns them into
process exit codes (see ``exit_code`` on each class).
"""

EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_CONVERGENCE = 4
EXIT_IO = 5


class GridShiftError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = 1


class CsvParseError(GridShiftError):
    """Raised when a CSV input cannot be parsed.

    ``line`` is the 1-based line number of the offending row.
    """

    exit_code = EXIT_PARSE

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class NonNumericFeatureError(CsvParseError):
    """Raised when a feature column holds a value that is not a number."""

    def __init__(self, value: str, column: int, line: int):
        super().__init__(f"column {column}: feature value {value!r} is not numeric", line)
        self.column = column


class ValidationFailure(GridShiftError):
    """Base for errors caused by invalid arguments or inputs."""

    exit_code = EXIT_VALIDATION


class InvalidBandwidthError(ValidationFailure):
    """Raised when a bandwidth h is not a positive finite number."""


class InvalidInputError(ValidationFailure):
    """Raised for malformed datasets, non-finite features or mismatched shapes."""


class EmptyInputError(InvalidInputError):
    """Raised when an algorithm receives zero data points."""


class InvalidParameterError(ValidationFailure):
    """Raised when an auxiliary parameter (e.g. the flat-region constant a) is out of range."""


class InvariantViolationError(ValidationFailure):
    """Raised when an internal structural invariant of the active grid is broken."""


class OracleScaleError(ValidationFailure):
    """Raised when a quadratic-cost oracle is asked to run above its size cap."""


class UndefinedScoreError(ValidationFailure):
    """Raised when a score is undefined for the given labeling (e.g. one cluster)."""


class TuningError(ValidationFailure):
    """Raised when no bandwidth in a sweep produced a defined score."""


class InvalidWindowError(ValidationFailure):
    """Raised when a track window does not intersect the frame."""


class SelectionError(ValidationFailure):
    """Raised when a cluster selection policy matches no cluster."""


class ImageDecodeError(GridShiftError):
    """Raised when an image file is missing, unsupported or corrupt."""

    exit_code = EXIT_IO
