"""
Per-point grid mean shift (MS++) and brute-force oracles.

MS++ moves every point simultaneously to the mean of all points in the
1-neighborhood of its cell, computed from the previous iteration's state.
The brute-force functions evaluate the same shift rule and the grid-local
loss directly from their definitions; they are reference implementations
for tests and small benchmarks, not production paths.
"""

import logging
from typing import Optional, Sequence

import numpy as np

from gridshift.config.settings import get_settings
from gridshift.errors import InvalidInputError, InvalidParameterError, OracleScaleError
from gridshift.models.clustering import ClusterLabeling, IterationRecord, KernelParams, PointState
from gridshift.services.grid import (
    as_dataset,
    grid_indices,
    neighbor_table,
    unique_cells,
    validate_bandwidth,
)

logger = logging.getLogger(__name__)

# upper bound on the (chunk, n) cell-distance matrix built by the vanilla oracle
_ORACLE_CHUNK_ELEMENTS = 4_000_000


def cell_distance(z, x, h: float) -> np.ndarray:
    """Chebyshev distance between grid indices: max_k |floor(x_k/h) - floor(z_k/h)|.

    ``x`` may be a single vector or an (n, d) array; returns a scalar or (n,) array.
    """
    z = np.asarray(z, dtype=float)
    x = np.asarray(x, dtype=float)
    return np.abs(np.floor(x / h) - np.floor(z / h)).max(axis=-1)


def _labels_by_final_cell(positions: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Group points whose positions share a grid cell; ids follow lexicographic key order."""
    _, inverse, counts = unique_cells(grid_indices(positions, h))
    d = positions.shape[1]
    sums = np.column_stack(
        [np.bincount(inverse, weights=positions[:, k], minlength=counts.shape[0]) for k in range(d)]
    )
    return inverse.astype(np.int64), sums / counts[:, None]


def mspp_step(positions: np.ndarray, h: float) -> tuple[np.ndarray, int]:
    """One parallel MS++ update.

    Rebuilds the grid over the current positions and moves each point to the
    mean of all points in its cell's 1-neighborhood. Returns the new positions
    and the number of occupied cells.
    """
    uniq, inverse, counts = unique_cells(grid_indices(positions, h))
    m, d = uniq.shape
    sums = np.column_stack(
        [np.bincount(inverse, weights=positions[:, k], minlength=m) for k in range(d)]
    )

    table = neighbor_table(uniq)
    nb_sums = np.zeros((m, d))
    nb_counts = np.zeros(m)
    for col in range(table.shape[1]):
        rows = table[:, col]
        hit = rows >= 0
        nb_sums[hit] += sums[rows[hit]]
        nb_counts[hit] += counts[rows[hit]]

    cell_targets = nb_sums / nb_counts[:, None]
    return cell_targets[inverse], m


def mspp_run(X, h: float, tol: Optional[float] = None, max_iter: Optional[int] = None) -> ClusterLabeling:
    """Cluster X with MS++ (parallel per-point grid mean shift).

    Args:
        X: (n, d) dataset
        h: Bandwidth
        tol: Stop when the largest point displacement falls below tol.
            Defaults to ``Settings.mspp_tol_factor * h``.
        max_iter: Iteration cap. Defaults to ``Settings.mspp_max_iter``.

    Returns:
        ClusterLabeling with one cluster per final occupied cell
    """
    settings = get_settings()
    X = as_dataset(X)
    h = validate_bandwidth(h)
    tol = settings.mspp_tol_factor * h if tol is None else tol
    max_iter = settings.mspp_max_iter if max_iter is None else max_iter
    if tol <= 0 or max_iter < 1:
        raise InvalidParameterError(f"tol must be positive and max_iter >= 1 (got {tol}, {max_iter})")

    state = PointState.from_dataset(X)
    initial_cells = unique_cells(grid_indices(state.positions, h))[0].shape[0]
    history: list[IterationRecord] = []
    converged = False
    t = 0
    while t < max_iter:
        new_positions, m = mspp_step(state.positions, h)
        shift = float(np.linalg.norm(new_positions - state.positions, axis=1).max())
        state.positions = new_positions
        t += 1
        history.append(IterationRecord(t=t, active_cells=m, max_shift=shift))
        logger.debug("MS++ iteration %d: occupied cells=%d, max shift=%.3g", t, m, shift)
        if shift < tol:
            converged = True
            break

    if not converged:
        logger.warning("MS++ did not converge within %d iterations (h=%g)", max_iter, h)

    labels, centroids = _labels_by_final_cell(state.positions, h)
    result = ClusterLabeling(
        labels=labels,
        centroids=centroids,
        iterations=t,
        converged=converged,
        initial_cells=initial_cells,
        history=history,
        h=h,
    )
    logger.info("MS++ finished: n=%d, h=%g, clusters=%d, iterations=%d", X.shape[0], h, result.n_clusters, t)
    return result


def brute_force_shift(z, X, h: float) -> np.ndarray:
    """Mean of all points x with cell_distance(z, x) <= 1, or z itself when there are none."""
    z = np.asarray(z, dtype=float)
    X = as_dataset(X)
    h = validate_bandwidth(h)
    mask = cell_distance(z, X, h) <= 1
    if not mask.any():
        return z.copy()
    return X[mask].mean(axis=0)


def vanilla_ms_step(positions: np.ndarray, X: np.ndarray, h: float) -> np.ndarray:
    """brute_force_shift applied to every row of positions against the fixed data X."""
    data_keys = grid_indices(X, h)
    out = positions.copy()
    chunk = max(1, _ORACLE_CHUNK_ELEMENTS // max(1, X.shape[0] * X.shape[1]))
    for start in range(0, positions.shape[0], chunk):
        block = positions[start:start + chunk]
        block_keys = grid_indices(block, h)
        mask = (np.abs(block_keys[:, None, :] - data_keys[None, :, :]).max(axis=2) <= 1)
        counts = mask.sum(axis=1)
        sums = mask.astype(float) @ X
        has = counts > 0
        out[start:start + chunk][has] = sums[has] / counts[has, None]
    return out


def vanilla_ms_run(X, h: float, tol: Optional[float] = None, max_iter: Optional[int] = None,
                   max_points: Optional[int] = None) -> ClusterLabeling:
    """O(n^2) mean shift with the grid-local flat kernel, started at every point.

    Each trajectory only depends on the fixed data, so points are frozen
    individually once their displacement drops below tol.
    """
    settings = get_settings()
    X = as_dataset(X)
    h = validate_bandwidth(h)
    max_points = settings.vanilla_ms_max_points if max_points is None else max_points
    if X.shape[0] > max_points:
        raise OracleScaleError(
            f"vanilla mean shift is an O(n^2) oracle limited to {max_points} points; got {X.shape[0]}"
        )
    tol = settings.mspp_tol_factor * h if tol is None else tol
    max_iter = settings.mspp_max_iter if max_iter is None else max_iter

    positions = X.copy()
    moving = np.arange(X.shape[0])
    history: list[IterationRecord] = []
    t = 0
    while moving.size and t < max_iter:
        updated = vanilla_ms_step(positions[moving], X, h)
        shift = np.linalg.norm(updated - positions[moving], axis=1)
        positions[moving] = updated
        t += 1
        history.append(IterationRecord(t=t, active_cells=int(moving.size), max_shift=float(shift.max())))
        moving = moving[shift >= tol]

    converged = moving.size == 0
    if not converged:
        logger.warning("Vanilla mean shift left %d points moving after %d iterations", moving.size, max_iter)

    labels, centroids = _labels_by_final_cell(positions, h)
    return ClusterLabeling(
        labels=labels,
        centroids=centroids,
        iterations=t,
        converged=converged,
        initial_cells=X.shape[0],
        history=history,
        h=h,
    )


def kde_loss(z, refs: Sequence[tuple], h: float, n_total: int, a: Optional[float] = None,
             neighborhood: Optional[Sequence[int]] = None) -> float:
    """Weighted grid-local loss at z.

    Returns sum_{i in P} m_i * ||z - r_i||^2 + (n_total - sum_{i in P} m_i) * a,
    where P holds the refs with cell_distance(z, r_i) <= 1. Passing
    ``neighborhood`` (indices into refs) fixes P instead, which is how a single
    cell update is scored with its neighbors frozen. ``a`` defaults to
    KernelParams.default_for(h, d).a = (3h)^2 d.

    Raises:
        InvalidParameterError: If a is smaller than an in-neighborhood squared
            distance, or the weights in P exceed n_total
    """
    h = validate_bandwidth(h)
    z = np.asarray(z, dtype=float).ravel()
    if a is None:
        a = KernelParams.default_for(h, z.shape[0]).a
    if not a > 0:
        raise InvalidParameterError(f"flat-region constant a must be positive, got {a}")
    if len(refs) == 0:
        return float(n_total * a)

    points = np.array([np.asarray(r, dtype=float).ravel() for r, _ in refs])
    weights = np.array([float(w) for _, w in refs])
    if points.shape[1] != z.shape[0]:
        raise InvalidInputError(f"refs have dimension {points.shape[1]}, z has {z.shape[0]}")
    if neighborhood is None:
        in_p = cell_distance(z, points, h) <= 1
    else:
        in_p = np.zeros(points.shape[0], dtype=bool)
        in_p[np.asarray(neighborhood, dtype=np.int64)] = True
    return weighted_loss(z, points[in_p], weights[in_p], a, n_total)


def weighted_loss(z: np.ndarray, points: np.ndarray, weights: np.ndarray, a: float, n_total: int) -> float:
    """Loss for an explicit in-neighborhood set (array form of kde_loss)."""
    sq = ((points - z) ** 2).sum(axis=1)
    if sq.size and sq.max() > a:
        raise InvalidParameterError(
            f"flat-region constant a={a} is below an in-neighborhood squared distance {sq.max():.6g}"
        )
    mass = weights.sum()
    if mass > n_total:
        raise InvalidParameterError(f"neighborhood weight {mass} exceeds n_total={n_total}")
    return float(weights @ sq + (n_total - mass) * a)
