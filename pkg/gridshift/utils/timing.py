"""
Wall-clock measurement for algorithm runs.

Usage:
    with Stopwatch() as sw:
        labeling = engine.run(X, cfg)
    sw.elapsed_ms
"""

import time


class Stopwatch:
    """Context manager recording elapsed wall-clock time in milliseconds."""

    def __init__(self):
        self._start: float | None = None
        self.elapsed_ms: float = 0.0

    def __enter__(self) -> "Stopwatch":
        self._start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.elapsed_ms = (time.perf_counter() - self._start) * 1000.0

    def __repr__(self):
        return f"Stopwatch(elapsed_ms={self.elapsed_ms:.3f})"
