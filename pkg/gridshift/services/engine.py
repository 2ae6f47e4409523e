"""
GridShift iteration loop.

Each iteration sweeps the active cells in lexicographic key order and replaces
every centroid, in place, by the count-weighted mean of the current centroids
of its active 1-neighbors. Counts are frozen at the start of the sweep. Cells
are then rehomed to the grid index of their new centroid, and cells landing
on one index are merged. The loop ends when no active cell has an active
neighbor, when an iteration changes nothing, or at the iteration cap.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from gridshift.config.settings import get_settings
from gridshift.models.clustering import ClusterLabeling, EngineConfig, IterationRecord
from gridshift.services.grid import (
    ActiveGridMap,
    CellRecord,
    GridArrays,
    as_dataset,
    bin_points,
    grid_indices,
    grouped_mean,
    merge_records,
    neighbor_table,
    unique_cells,
    validate_bandwidth,
)

logger = logging.getLogger(__name__)

# observer(cell_row, old_centroid, new_centroid, neighbor_centroids, neighbor_counts)
SweepObserver = Callable[[int, np.ndarray, np.ndarray, np.ndarray, np.ndarray], None]


@dataclass
class EngineTrace:
    """Initial grid plus the full active-grid state after every iteration."""

    initial: ActiveGridMap
    snapshots: list[ActiveGridMap] = field(default_factory=list)

    @property
    def maps(self) -> list[ActiveGridMap]:
        """Initial map followed by every snapshot; maps[t] is the state entering iteration t+1."""
        return [self.initial] + self.snapshots

    @property
    def cell_counts(self) -> list[int]:
        return [len(m) for m in self.maps]

    def __len__(self):
        return len(self.snapshots)


def _grid_state(grid_map: ActiveGridMap):
    keys = grid_map.sorted_keys()
    records = [grid_map.cells[k] for k in keys]
    key_arr = np.array(keys, dtype=np.int64).reshape(len(keys), grid_map.d)
    centroids = np.stack([r.centroid for r in records]).astype(float)
    counts = np.array([r.count for r in records], dtype=np.int64)
    return key_arr, records, centroids, counts


def sweep_centroids(grid_map: ActiveGridMap, observer: Optional[SweepObserver] = None) -> np.ndarray:
    """Run one in-place sequential sweep and return the updated centroids in key order.

    Neighbors earlier in the visit order contribute their already-updated
    centroids; weights are the counts at the start of the sweep.
    """
    keys, _, centroids, counts = _grid_state(grid_map)
    return _sweep(keys, centroids, counts, observer)


def _sweep(keys, centroids, counts, observer=None, table=None) -> np.ndarray:
    if table is None:
        table = neighbor_table(keys)
    current = centroids.copy()
    for row in range(keys.shape[0]):
        nb = table[row]
        nb = nb[nb >= 0]
        refs = current[nb]
        old = current[row].copy()
        if nb.shape[0] > 1:
            weights = counts[nb]
            current[row] = old + (weights @ (refs - old)) / weights.sum()
        if observer is not None:
            observer(row, old, current[row].copy(), refs, counts[nb])
    return current


def _isolated(table: np.ndarray) -> bool:
    return bool(((table >= 0).sum(axis=1) == 1).all())


@dataclass
class _Step:
    """Array state after one iteration; row_map[i] is the new row of old cell i."""

    keys: np.ndarray
    centroids: np.ndarray
    counts: np.ndarray
    row_map: np.ndarray
    changed: bool
    max_shift: float


def _step(keys, centroids, counts, h: float, table=None, observer=None) -> _Step:
    updated = _sweep(keys, centroids, counts, observer, table)
    moved = grid_indices(updated, h)
    changed = not (np.array_equal(moved, keys) and np.array_equal(updated, centroids))
    max_shift = float(np.linalg.norm(updated - centroids, axis=1).max())

    new_keys, row_map, _ = unique_cells(moved)
    row_map = row_map.astype(np.int64)
    m = new_keys.shape[0]
    new_counts = np.bincount(row_map, weights=counts, minlength=m).astype(np.int64)
    new_centroids = grouped_mean(updated, row_map, counts.astype(float), m)
    return _Step(new_keys, new_centroids, new_counts, row_map, changed, max_shift)


def _iterate(grid_map: ActiveGridMap, validate: bool = True,
             observer: Optional[SweepObserver] = None) -> tuple[ActiveGridMap, bool, float]:
    keys, records, centroids, counts = _grid_state(grid_map)
    updated = _sweep(keys, centroids, counts, observer)

    new_keys = grid_indices(updated, grid_map.h)
    changed = not (np.array_equal(new_keys, keys) and np.array_equal(updated, centroids))
    max_shift = float(np.linalg.norm(updated - centroids, axis=1).max())

    uniq, inverse, _ = unique_cells(new_keys)
    order = np.argsort(inverse, kind="stable")
    bounds = np.cumsum(np.bincount(inverse, minlength=uniq.shape[0]))[:-1]

    rehomed = ActiveGridMap(h=grid_map.h, d=grid_map.d)
    for key, rows in zip(map(tuple, uniq.tolist()), np.split(order, bounds)):
        moved = [CellRecord(updated[i], records[i].count, records[i].members) for i in rows]
        rehomed.cells[key] = merge_records(moved, validate=validate)
    return rehomed, changed, max_shift


def iterate_once(grid_map: ActiveGridMap) -> tuple[ActiveGridMap, bool]:
    """One GridShift iteration: sequential sweep, then rehome and merge.

    Returns the new map and whether any cell key or centroid changed.
    """
    if len(grid_map) == 0:
        return grid_map, False
    new_map, changed, _ = _iterate(grid_map)
    return new_map, changed


def has_converged(grid_map: ActiveGridMap) -> bool:
    """True iff no active cell has another active cell in its 1-neighborhood."""
    if len(grid_map) <= 1:
        return True
    keys = np.array(grid_map.sorted_keys(), dtype=np.int64)
    return _isolated(neighbor_table(keys))


def _snapshot(grid: GridArrays, keys, centroids, counts, cell_rows) -> ActiveGridMap:
    state = GridArrays(h=grid.h, keys=keys, centroids=centroids, counts=counts,
                       point_rows=cell_rows[grid.point_rows])
    return state.to_map()


def _run(X, cfg: EngineConfig, traced: bool, check_invariants: Optional[bool]):
    X = as_dataset(X)
    n = X.shape[0]
    if check_invariants is None:
        check_invariants = get_settings().check_invariants

    grid = bin_points(X, cfg.h)
    keys, centroids, counts = grid.keys, grid.centroids, grid.counts
    initial_cells = len(grid)
    # cell_rows[r] is the current row of the initial cell r
    cell_rows = np.arange(initial_cells)
    keep_maps = traced or check_invariants
    initial = grid.to_map() if keep_maps else None
    if check_invariants:
        initial.check_partition(n)

    history: list[IterationRecord] = []
    snapshots: list[ActiveGridMap] = []
    table = neighbor_table(keys)
    converged = True
    t = 0
    while True:
        step = _step(keys, centroids, counts, cfg.h, table=table)
        keys, centroids, counts = step.keys, step.centroids, step.counts
        cell_rows = step.row_map[cell_rows]
        t += 1
        m = keys.shape[0]
        if cfg.record_history:
            history.append(IterationRecord(t=t, active_cells=m, max_shift=step.max_shift))
        if keep_maps:
            grid_map = _snapshot(grid, keys, centroids, counts, cell_rows)
            if check_invariants:
                grid_map.check_partition(n)
            if traced:
                snapshots.append(grid_map)
        logger.debug("iteration %d: m=%d, max_shift=%.3g, changed=%s", t, m, step.max_shift, step.changed)

        table = neighbor_table(keys)
        if not step.changed or _isolated(table):
            break
        if t >= cfg.max_iterations:
            converged = False
            logger.warning(
                "GridShift did not converge within %d iterations (h=%g, %d active cells remain)",
                cfg.max_iterations, cfg.h, m,
            )
            break

    labeling = ClusterLabeling(
        labels=cell_rows[grid.point_rows],
        centroids=centroids,
        iterations=t,
        converged=converged,
        initial_cells=initial_cells,
        history=history,
        h=cfg.h,
    )
    logger.info(
        "GridShift finished: n=%d, h=%g, clusters=%d, iterations=%d, initial cells=%d",
        n, cfg.h, labeling.n_clusters, t, initial_cells,
    )
    trace = EngineTrace(initial=initial, snapshots=snapshots) if traced else None
    return labeling, trace


def run(X, cfg: EngineConfig, check_invariants: Optional[bool] = None) -> ClusterLabeling:
    """Cluster X with GridShift.

    Args:
        X: (n, d) dataset
        cfg: Engine configuration (bandwidth, iteration cap)
        check_invariants: Verify the member partition after every iteration.
            Defaults to ``Settings.check_invariants``.

    Returns:
        ClusterLabeling; ``converged`` is False when the iteration cap was hit
    """
    labeling, _ = _run(X, cfg, traced=False, check_invariants=check_invariants)
    return labeling


def run_traced(X, cfg: EngineConfig,
               check_invariants: Optional[bool] = None) -> tuple[ClusterLabeling, EngineTrace]:
    """As run(), additionally returning the active-grid state after every iteration."""
    return _run(X, cfg, traced=True, check_invariants=check_invariants)


def cluster(X, h: float, max_iterations: Optional[int] = None) -> ClusterLabeling:
    """Convenience wrapper: validate h, build an EngineConfig from settings and run."""
    h = validate_bandwidth(h)
    if max_iterations is None:
        max_iterations = get_settings().max_iterations
    return run(X, EngineConfig(h=h, max_iterations=max_iterations))
