"""
Dataset ingestion, normalization and seeded synthetic generators.

CSV dialect: comma-separated, blank lines ignored, optional header row. The
first row is a header when all of its fields are non-numeric, or when one of
its fields is non-numeric while the same column of the next row is numeric.
"""

import csv
import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
from pydantic import ValidationError
from sklearn import datasets as sk_datasets

from gridshift.config.presets import get_preset
from gridshift.errors import (
    CsvParseError,
    EmptyInputError,
    InvalidInputError,
    InvalidParameterError,
    NonNumericFeatureError,
)
from gridshift.models.datasets import GeneratorSpec, LabeledDataset

logger = logging.getLogger(__name__)

LabelColumn = Union[int, str, None]


def _is_number(value: str) -> bool:
    try:
        float(value)
    except ValueError:
        return False
    return True


def _detect_header(rows: list[tuple[int, list[str]]]) -> bool:
    first = rows[0][1]
    numeric = [_is_number(v) for v in first]
    if not any(numeric):
        return True
    if all(numeric) or len(rows) < 2:
        return False
    second = rows[1][1]
    return any(
        not is_num and col < len(second) and _is_number(second[col])
        for col, is_num in enumerate(numeric)
    )


def _resolve_label_column(label_col: LabelColumn, header: Optional[list[str]], width: int) -> Optional[int]:
    if label_col is None:
        return None
    if isinstance(label_col, str) and not label_col.lstrip("-").isdigit():
        if header is None or label_col not in header:
            raise InvalidInputError(f"label column {label_col!r} not found in CSV header")
        return header.index(label_col)
    idx = int(label_col)
    if idx < 0:
        idx += width
    if not 0 <= idx < width:
        raise InvalidInputError(f"label column index {label_col} out of range for {width} columns")
    return idx


def load_csv(path: Union[str, Path], label_col: LabelColumn = None) -> LabeledDataset:
    """
    Load a numeric CSV dataset.

    Args:
        path: CSV file
        label_col: Ground-truth column, by 0-based index or header name.
            The column is removed from the features; its values may be text.

    Returns:
        LabeledDataset with integer label codes (sorted by label value)

    Raises:
        CsvParseError: Ragged rows (with 1-based line number)
        NonNumericFeatureError: A feature value is not a number
        EmptyInputError: No data rows
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [
            (line_no, [field.strip() for field in row])
            for line_no, row in enumerate(csv.reader(fh), start=1)
            if row and any(field.strip() for field in row)
        ]
    if not rows:
        raise EmptyInputError(f"{path} contains no rows")

    header = None
    if _detect_header(rows):
        header = rows[0][1]
        rows = rows[1:]
        if not rows:
            raise EmptyInputError(f"{path} has a header but no data rows")

    width = len(header) if header is not None else len(rows[0][1])
    label_idx = _resolve_label_column(label_col, header, width)
    feature_cols = [c for c in range(width) if c != label_idx]
    if not feature_cols:
        raise InvalidInputError(f"{path} has no feature columns")

    X = np.empty((len(rows), len(feature_cols)), dtype=float)
    raw_labels = []
    for r, (line_no, fields) in enumerate(rows):
        if len(fields) != width:
            raise CsvParseError(f"expected {width} fields, found {len(fields)}", line_no)
        for c, col in enumerate(feature_cols):
            try:
                X[r, c] = float(fields[col])
            except ValueError:
                raise NonNumericFeatureError(fields[col], col, line_no) from None
        if label_idx is not None:
            raw_labels.append(fields[label_idx])

    if not np.isfinite(X).all():
        raise InvalidInputError(f"{path} contains NaN or infinite feature values")

    labels = None
    label_names: list[str] = []
    if label_idx is not None:
        labels, label_names = encode_labels(raw_labels)

    names = [header[c] for c in feature_cols] if header is not None else [f"x{c}" for c in feature_cols]
    logger.info("Loaded %s: %d rows, %d features%s", path.name, X.shape[0], X.shape[1],
                f", label column {label_idx}" if label_idx is not None else "")
    return LabeledDataset(X=X, labels=labels, feature_names=names, label_names=label_names, name=path.stem)


def encode_labels(raw: list[str]) -> tuple[np.ndarray, list[str]]:
    """Map label values to integer codes. Numeric labels sort numerically, others as text."""
    if all(_is_number(v) for v in raw):
        values = np.array([float(v) for v in raw])
        uniq, codes = np.unique(values, return_inverse=True)
        names = [f"{u:g}" for u in uniq]
    else:
        uniq, codes = np.unique(np.array(raw, dtype=str), return_inverse=True)
        names = [str(u) for u in uniq]
    return codes.astype(np.int64), names


def write_csv(dataset: LabeledDataset, path: Union[str, Path]) -> Path:
    """Write features (and labels as the last column) with a header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = list(dataset.feature_names) or [f"x{c}" for c in range(dataset.d)]
        if dataset.labels is not None:
            header.append("label")
        writer.writerow(header)
        for i in range(dataset.n):
            row = [repr(float(v)) for v in dataset.X[i]]
            if dataset.labels is not None:
                row.append(int(dataset.labels[i]))
            writer.writerow(row)
    return path


def min_max_normalize(X) -> np.ndarray:
    """Scale every column to [0, 1]; constant columns become 0."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInputError("cannot normalize an empty dataset")
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    return (X - lo) / safe


def load_iris() -> LabeledDataset:
    """Fisher's Iris data (150 x 4, 3 classes) as bundled with scikit-learn."""
    bunch = sk_datasets.load_iris()
    return LabeledDataset(
        X=np.asarray(bunch.data, dtype=float),
        labels=np.asarray(bunch.target, dtype=np.int64),
        feature_names=[str(f) for f in bunch.feature_names],
        label_names=[str(t) for t in bunch.target_names],
        name="iris",
    )


def gaussian_mixture(n: int, d: int, k: int, spread: float = 0.03, seed: int = 0) -> LabeledDataset:
    """Equal-weight isotropic Gaussian mixture with component means drawn uniformly in [0, 1]^d."""
    if n < 1 or d < 1 or k < 1:
        raise InvalidParameterError(f"n, d and k must be positive (got {n}, {d}, {k})")
    rng = np.random.default_rng(seed)
    means = rng.uniform(0.0, 1.0, size=(k, d))
    labels = rng.integers(0, k, size=n)
    X = means[labels] + rng.normal(0.0, spread, size=(n, d))
    return LabeledDataset(X=X, labels=labels.astype(np.int64), name=f"gmm-n{n}-d{d}-k{k}")


def separated_groups(sizes: list[int], d: int, h: float, spread: Optional[float] = None,
                     seed: int = 0) -> LabeledDataset:
    """Tight groups whose centres are more than 3h apart in every coordinate.

    Each group stays inside a box of side h/4 around its centre, so groups
    never share a 1-neighborhood at bandwidth h.
    """
    if not sizes or any(s < 1 for s in sizes):
        raise InvalidParameterError("group sizes must be positive")
    rng = np.random.default_rng(seed)
    spread = h / 16 if spread is None else spread
    gap = 5.0 * h
    parts, labels = [], []
    for g, size in enumerate(sizes):
        centre = np.full(d, (g + 0.5) * gap)
        offsets = np.clip(rng.normal(0.0, spread, size=(size, d)), -h / 8, h / 8)
        parts.append(centre + offsets)
        labels.append(np.full(size, g, dtype=np.int64))
    return LabeledDataset(X=np.vstack(parts), labels=np.concatenate(labels), name=f"groups-{len(sizes)}")


def gaussian_sample(n: int, s, seed: int = 0) -> np.ndarray:
    """n points from N(0, diag(s^2)); s is a per-axis standard deviation vector."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if n < 1:
        raise InvalidParameterError(f"n must be positive, got {n}")
    if (s < 0).any():
        raise InvalidParameterError(f"standard deviations must be non-negative, got {s.tolist()}")
    rng = np.random.default_rng(seed)
    return rng.normal(0.0, 1.0, size=(n, s.shape[0])) * s


def parse_generator_spec(text: str) -> GeneratorSpec:
    """Parse ``kind:key=value,...`` (e.g. ``gmm:n=1000000,d=3,k=10``)."""
    kind, _, params = text.partition(":")
    fields: dict = {"kind": kind.strip()}
    for item in filter(None, (p.strip() for p in params.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise InvalidParameterError(f"generator parameter {item!r} is not key=value")
        fields[key.strip()] = value.strip()
    try:
        return GeneratorSpec(**fields)
    except ValidationError as exc:
        raise InvalidParameterError(f"invalid generator spec {text!r}: {exc.errors()[0]['msg']}") from None


def generate(spec: GeneratorSpec, seed: int = 0) -> LabeledDataset:
    """Materialize a generator spec; spec.seed takes precedence over seed."""
    seed = spec.seed if spec.seed is not None else seed
    if spec.kind == "groups":
        base, extra = divmod(spec.n, spec.k)
        sizes = [base + (1 if g < extra else 0) for g in range(spec.k)]
        sizes = [s for s in sizes if s > 0]
        return separated_groups(sizes, spec.d, h=spec.spread * 16, seed=seed)
    return gaussian_mixture(spec.n, spec.d, spec.k, spread=spec.spread, seed=seed)


def load_prnn(path: Union[str, Path]) -> LabeledDataset:
    """Ripley's two-class synthetic data in its distributed ``synth.tr`` layout.

    The file is whitespace-separated with a header line (``xs ys yc``); the
    last column is the class. Files ending in ``.csv`` are read with load_csv
    and the label in column 2.
    """
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return load_csv(path, label_col=2)

    X, raw_labels = [], []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields or (line_no == 1 and not _is_number(fields[0])):
                continue
            if len(fields) != 3:
                raise CsvParseError(f"expected 3 fields, found {len(fields)}", line_no)
            for col, value in enumerate(fields[:2]):
                if not _is_number(value):
                    raise NonNumericFeatureError(value, col, line_no)
            X.append([float(fields[0]), float(fields[1])])
            raw_labels.append(fields[2])
    if not X:
        raise EmptyInputError(f"{path} contains no rows")

    labels, names = encode_labels(raw_labels)
    logger.info("Loaded %s: %d rows, 2 features", path.name, len(X))
    return LabeledDataset(X=np.array(X), labels=labels, feature_names=["xs", "ys"],
                          label_names=names, name="prnn")


def load_preset(name: str, data_dir: Union[str, Path]) -> LabeledDataset:
    """Load a preset dataset: bundled ones from scikit-learn, external ones from data_dir.

    Raises:
        InvalidParameterError: Unknown preset name
        FileNotFoundError: External data file missing from data_dir
    """
    try:
        preset = get_preset(name)
    except ValueError as exc:
        raise InvalidParameterError(str(exc)) from None
    if preset.source == "bundled":
        return load_iris()
    if preset.filename is None:
        raise FileNotFoundError(f"preset {name!r} has no known file name; load it with load_csv")
    path = Path(data_dir) / preset.filename
    if not path.exists():
        raise FileNotFoundError(f"{name} data not found at {path}")
    if name == "prnn":
        return load_prnn(path)
    return load_csv(path, label_col=preset.label_column)


def scale_features(X, scaling: str) -> np.ndarray:
    """Apply a preset's feature scaling: 'minmax' or 'none'."""
    if scaling == "minmax":
        return min_max_normalize(X)
    if scaling == "none":
        return np.asarray(X, dtype=float)
    raise InvalidParameterError(f"unknown scaling {scaling!r}; expected 'minmax' or 'none'")
