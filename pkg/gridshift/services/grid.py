"""
Grid indexing and the active-grid hash tables.

The data space is partitioned into cells of side h. A cell holding at least one
point is *active*; the map of active cells (centroid, resident count, resident
point indices) is the entire mutable state of a GridShift iteration.

Neighbor lookup is vectorized: cell indices are encoded into integer codes with
``np.ravel_multi_index`` and looked up with ``np.searchsorted``. When the grid
span is too large to encode, a dict-based fallback walks ``neighborhood()``.
The initial grid is binned in O(n) with ``np.bincount`` whenever the bounding
box of the data spans few enough cells.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from gridshift.errors import (
    EmptyInputError,
    InvalidBandwidthError,
    InvalidInputError,
    InvariantViolationError,
)

logger = logging.getLogger(__name__)

GridIndex = tuple[int, ...]

# 3^d neighbor enumeration stops being practical beyond this.
MAX_DIMENSION = 12

_MAX_ENCODED_SPAN = 2**62

# bin_points bins densely while the bounding grid has at most this many cells per point
_DENSE_SPAN_PER_POINT = 4
_DENSE_SPAN_MIN = 1 << 16


def validate_bandwidth(h) -> float:
    """Return h as a float or raise InvalidBandwidthError."""
    try:
        value = float(h)
    except (TypeError, ValueError):
        raise InvalidBandwidthError(f"bandwidth must be a number, got {h!r}") from None
    if not math.isfinite(value) or value <= 0:
        raise InvalidBandwidthError(f"bandwidth must be a positive finite number, got {h!r}")
    return value


def as_dataset(X) -> np.ndarray:
    """Coerce X to a finite (n, d) float array.

    A flat sequence of scalars is read as n one-dimensional points.
    """
    try:
        arr = np.asarray(X, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"dataset rows must share one numeric dimension: {exc}") from None
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InvalidInputError(f"dataset must be two-dimensional (n, d), got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptyInputError("dataset is empty")
    if arr.shape[1] == 0:
        raise InvalidInputError("dataset has zero features")
    if arr.shape[1] > MAX_DIMENSION:
        raise InvalidInputError(
            f"dimension {arr.shape[1]} exceeds the supported maximum of {MAX_DIMENSION}"
        )
    if not np.isfinite(arr).all():
        raise InvalidInputError("dataset contains NaN or infinite values")
    return arr


def grid_index(x, h: float) -> GridIndex:
    """Cell index floor(x / h), taken componentwise toward negative infinity."""
    h = validate_bandwidth(h)
    arr = np.asarray(x, dtype=float).ravel()
    if not np.isfinite(arr).all():
        raise InvalidInputError(f"feature vector has non-finite components: {arr.tolist()}")
    return tuple(int(v) for v in np.floor(arr / h))


def grid_indices(X: np.ndarray, h: float) -> np.ndarray:
    """Vectorized grid_index for an (n, d) array; returns int64 (n, d)."""
    return np.floor(X / h).astype(np.int64)


@lru_cache(maxsize=None)
def neighbor_offsets(d: int) -> np.ndarray:
    """All v in {-1, 0, 1}^d in lexicographic order, as a read-only (3^d, d) array."""
    offsets = np.array(list(itertools.product((-1, 0, 1), repeat=d)), dtype=np.int64)
    offsets.setflags(write=False)
    return offsets


def neighborhood(j: Sequence[int]) -> list[GridIndex]:
    """The 3^d indices j + v, v in {-1, 0, 1}^d, enumerated lexicographically in v."""
    j = tuple(int(c) for c in j)
    return [tuple(c + dv for c, dv in zip(j, v)) for v in itertools.product((-1, 0, 1), repeat=len(j))]


def weighted_mean(points: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Weighted mean anchored at the first point.

    Computed as p0 + sum(w_i (p_i - p0)) / sum(w_i) so that identical inputs
    return the input bit-for-bit and an isolated point stays where it is.
    """
    ref = points[0]
    if points.shape[0] == 1:
        return ref.copy()
    return ref + (weights @ (points - ref)) / weights.sum()


@dataclass
class CellRecord:
    """One active cell: centroid, resident count and resident point indices."""

    centroid: np.ndarray
    count: int
    members: np.ndarray

    def __post_init__(self):
        if self.count < 1:
            raise InvariantViolationError(f"cell count must be positive, got {self.count}")
        if self.count != self.members.shape[0]:
            raise InvariantViolationError(
                f"cell count {self.count} does not match {self.members.shape[0]} members"
            )

    def __repr__(self):
        return f"CellRecord(centroid={self.centroid.tolist()}, count={self.count})"


@dataclass
class ActiveGridMap:
    """Keyed collection of active cells for one bandwidth and dimension."""

    h: float
    d: int
    cells: dict[GridIndex, CellRecord] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.cells)

    def __contains__(self, key) -> bool:
        return tuple(key) in self.cells

    def __iter__(self) -> Iterator[GridIndex]:
        return iter(self.sorted_keys())

    def __getitem__(self, key) -> CellRecord:
        return self.cells[tuple(key)]

    def sorted_keys(self) -> list[GridIndex]:
        return sorted(self.cells)

    @property
    def total_count(self) -> int:
        return sum(rec.count for rec in self.cells.values())

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Keys (m, d), centroids (m, d) and counts (m,) in lexicographic key order."""
        keys = self.sorted_keys()
        key_arr = np.array(keys, dtype=np.int64).reshape(len(keys), self.d)
        centroids = np.array([self.cells[k].centroid for k in keys], dtype=float).reshape(len(keys), self.d)
        counts = np.array([self.cells[k].count for k in keys], dtype=np.int64)
        return key_arr, centroids, counts

    def labels(self, n: int) -> np.ndarray:
        """Per-point cluster id; ids follow lexicographic key order."""
        labels = np.full(n, -1, dtype=np.int64)
        for cluster_id, key in enumerate(self.sorted_keys()):
            labels[self.cells[key].members] = cluster_id
        return labels

    def check_partition(self, n: int) -> None:
        """Raise InvariantViolationError unless member sets partition {0, ..., n-1}."""
        if self.total_count != n:
            raise InvariantViolationError(f"counts sum to {self.total_count}, expected {n}")
        seen = np.zeros(n, dtype=bool)
        for key, rec in self.cells.items():
            if rec.members.size and (rec.members.min() < 0 or rec.members.max() >= n):
                raise InvariantViolationError(f"cell {key} holds an out-of-range point index")
            if seen[rec.members].any():
                raise InvariantViolationError(f"cell {key} shares members with another cell")
            seen[rec.members] = True
        if not seen.all():
            raise InvariantViolationError("some points are not resident in any cell")


def unique_cells(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct key rows in lexicographic order, the row of each input key, and row counts.

    Keys are packed into scalar codes first; sorting codes matches lexicographic
    row order and is much faster than ``np.unique(axis=0)``.
    """
    encoding = _encoding_shape(keys)
    if encoding is None:
        uniq, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
        return uniq, inverse.reshape(-1), counts
    lo, shape = encoding
    codes = np.ravel_multi_index(tuple((keys - lo).T), shape)
    uniq_codes, inverse, counts = np.unique(codes, return_inverse=True, return_counts=True)
    uniq = np.column_stack(np.unravel_index(uniq_codes, shape)).astype(np.int64) + lo
    return uniq, inverse.reshape(-1), counts


@dataclass
class GridArrays:
    """Array form of an active grid.

    Rows follow lexicographic key order; ``point_rows[i]`` is the row of the
    cell holding point i. Member lists are only materialized on demand.
    """

    h: float
    keys: np.ndarray        # (m, d) int64
    centroids: np.ndarray   # (m, d) float
    counts: np.ndarray      # (m,) int64
    point_rows: np.ndarray  # (n,) int64

    def __len__(self) -> int:
        return self.keys.shape[0]

    def members(self) -> list[np.ndarray]:
        """Ascending point indices of every cell, in row order."""
        order = np.argsort(self.point_rows, kind="stable")
        return np.split(order, np.cumsum(self.counts)[:-1])

    def to_map(self) -> ActiveGridMap:
        grid_map = ActiveGridMap(h=self.h, d=self.keys.shape[1])
        rows = zip(map(tuple, self.keys.tolist()), self.centroids, self.counts.tolist(), self.members())
        for key, centroid, count, members in rows:
            grid_map.cells[key] = CellRecord(centroid, count, members)
        return grid_map


def _first_rows(rows: np.ndarray, m: int) -> np.ndarray:
    """Lowest input position mapped to each of the m rows."""
    first = np.full(m, rows.shape[0], dtype=np.int64)
    np.minimum.at(first, rows, np.arange(rows.shape[0]))
    return first


def grouped_mean(values: np.ndarray, rows: np.ndarray, weights: np.ndarray, m: int) -> np.ndarray:
    """Weighted mean of the values sharing each row, anchored at the group's first value.

    Single-member groups and groups of identical values come back unchanged.
    """
    anchors = values[_first_rows(rows, m)]
    deviation = (values - anchors[rows]) * weights[:, None]
    sums = np.column_stack(
        [np.bincount(rows, weights=deviation[:, k], minlength=m) for k in range(values.shape[1])]
    )
    totals = np.bincount(rows, weights=weights, minlength=m)
    return anchors + sums / totals[:, None]


def bin_points(X, h: float) -> GridArrays:
    """Assign every point to cell floor(x / h) and record per-cell mean and count.

    Grids spanning at most a small multiple of n cells are binned densely with
    ``np.bincount``; sparser grids fall back to sorting encoded keys.
    """
    X = as_dataset(X)
    h = validate_bandwidth(h)
    n, d = X.shape
    cells = grid_indices(X, h)

    lo = cells.min(axis=0)
    shape = tuple(int(s) for s in cells.max(axis=0) - lo + 1)
    span = math.prod(shape)
    if span <= _DENSE_SPAN_PER_POINT * n + _DENSE_SPAN_MIN:
        codes = np.ravel_multi_index(tuple((cells - lo).T), shape)
        occupancy = np.bincount(codes, minlength=span)
        occupied = np.flatnonzero(occupancy)
        rank = np.zeros(span, dtype=np.int64)
        rank[occupied] = np.arange(occupied.shape[0])
        keys = np.column_stack(np.unravel_index(occupied, shape)).astype(np.int64) + lo
        point_rows = rank[codes]
        counts = occupancy[occupied].astype(np.int64)
    else:
        keys, point_rows, counts = unique_cells(cells)
        point_rows = point_rows.astype(np.int64)

    centroids = grouped_mean(X, point_rows, np.ones(n), keys.shape[0])
    logger.debug("Binned points: n=%d, d=%d, h=%g, m=%d", n, d, h, keys.shape[0])
    return GridArrays(h=h, keys=keys, centroids=centroids, counts=counts, point_rows=point_rows)


def build_active_grid(X, h: float) -> ActiveGridMap:
    """Assign every point to cell floor(x / h) and record per-cell mean, count and members."""
    return bin_points(X, h).to_map()


def merge_records(records: Sequence[CellRecord], validate: bool = True) -> CellRecord:
    """Merge cells that landed on one index: count-weighted centroid, summed counts, united members."""
    if len(records) == 1:
        return records[0]
    counts = np.array([r.count for r in records], dtype=float)
    centroids = np.stack([r.centroid for r in records])
    members = np.concatenate([r.members for r in records])
    if validate and np.unique(members).shape[0] != members.shape[0]:
        raise InvariantViolationError("merged cells share resident points")
    return CellRecord(weighted_mean(centroids, counts), int(counts.sum()), members)


def merge_into(grid_map: ActiveGridMap, key: Sequence[int], incoming: CellRecord,
               validate: bool = True) -> ActiveGridMap:
    """Insert incoming at key, merging with an existing record if the key is taken."""
    key = tuple(int(c) for c in key)
    existing = grid_map.cells.get(key)
    if existing is None:
        grid_map.cells[key] = incoming
    else:
        grid_map.cells[key] = merge_records([existing, incoming], validate=validate)
    return grid_map


def _encoding_shape(keys: np.ndarray) -> tuple[np.ndarray, tuple[int, ...]] | None:
    lo = keys.min(axis=0) - 1
    shape = tuple(int(s) for s in keys.max(axis=0) - lo + 2)
    if math.prod(shape) >= _MAX_ENCODED_SPAN:
        return None
    return lo, shape


def neighbor_table(keys: np.ndarray) -> np.ndarray:
    """For each key row, the row index of every neighbor j + v (or -1 when inactive).

    Columns follow the lexicographic order of neighbor_offsets(d); the centre
    column (v = 0) always points at the row itself.
    """
    keys = np.asarray(keys, dtype=np.int64)
    m, d = keys.shape
    offsets = neighbor_offsets(d)
    encoding = _encoding_shape(keys)
    if encoding is None:
        logger.debug("Grid span too large to encode; using hashed neighbor lookup")
        return _neighbor_table_hashed(keys)

    lo, shape = encoding
    codes = np.ravel_multi_index(tuple((keys - lo).T), shape)
    sorter = np.argsort(codes, kind="stable")
    sorted_codes = codes[sorter]

    table = np.full((m, offsets.shape[0]), -1, dtype=np.int64)
    for col, v in enumerate(offsets):
        flat_idx = np.ravel_multi_index(tuple((keys + v - lo).T), shape)
        pos = np.minimum(np.searchsorted(sorted_codes, flat_idx), m - 1)
        hit = sorted_codes[pos] == flat_idx
        table[hit, col] = sorter[pos[hit]]
    return table


def _neighbor_table_hashed(keys: np.ndarray) -> np.ndarray:
    rows = {tuple(k): i for i, k in enumerate(keys.tolist())}
    d = keys.shape[1]
    table = np.full((keys.shape[0], 3**d), -1, dtype=np.int64)
    for i, key in enumerate(keys.tolist()):
        for col, nb in enumerate(neighborhood(key)):
            table[i, col] = rows.get(nb, -1)
    return table
