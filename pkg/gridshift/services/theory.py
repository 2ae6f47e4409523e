"""
Empirical checks of GridShift's convergence behaviour.

- Gaussian shrinkage: on data from N(0, diag(s^2)) the count-weighted spread
  of centroids is predicted to shrink per iteration as
  s' = s / (1 + v h^2 / s^2), with the active cell count predicted as
  prod_j (floor(6 s'_j / h) + 1). v = 2.25 models the kernel as a Gaussian
  with standard deviation 1.5 h; v = 0.75 is the variance of the flat
  3h-wide neighborhood the grid actually averages over.
- Descent: every single-cell update, with its neighbors frozen, must not
  increase the weighted grid-local loss, and must decrease it when the
  centroid moves.
- Monotone cells: the active cell count never increases.
"""

import logging
import math
from pathlib import Path
from typing import Optional, Union

import numpy as np

from gridshift.config.settings import get_settings
from gridshift.errors import InvalidParameterError
from gridshift.models.clustering import EngineConfig
from gridshift.models.reports import (
    DescentReport,
    DescentViolation,
    GaussianExperimentRecord,
    MonotoneCellsReport,
    TheoryRow,
)
from gridshift.services import engine
from gridshift.services.baselines import weighted_loss
from gridshift.services.datasets import gaussian_sample
from gridshift.services.engine import EngineTrace
from gridshift.services.grid import ActiveGridMap, validate_bandwidth

logger = logging.getLogger(__name__)

MIN_SAMPLES = 1000
MAX_DIMENSION = 5
GAUSSIAN_KERNEL_VARIANCE = 2.25
BOX_KERNEL_VARIANCE = 0.75


def weighted_axis_std(grid_map: ActiveGridMap) -> np.ndarray:
    """Per-axis standard deviation of centroids, each weighted by its resident count."""
    _, centroids, counts = grid_map.arrays()
    weights = counts.astype(float)
    mean = weights @ centroids / weights.sum()
    var = weights @ (centroids - mean) ** 2 / weights.sum()
    return np.sqrt(np.maximum(var, 0.0))


def predict_std(s: np.ndarray, h: float, kernel_variance: float = GAUSSIAN_KERNEL_VARIANCE) -> np.ndarray:
    """One-step shrinkage s / (1 + v h^2 / s^2) per axis with v = kernel_variance; zero stays zero."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = s[pos] / (1.0 + kernel_variance * h * h / (s[pos] ** 2))
    return out


def predict_cells(s: np.ndarray, h: float) -> int:
    """Predicted active cell count prod_j (floor(6 s_j / h) + 1)."""
    return int(math.prod(int(math.floor(6.0 * v / h)) + 1 for v in np.asarray(s, dtype=float)))


def gaussian_experiment(n: int, d: int, s, h: float, seed: int = 0,
                        min_samples: int = MIN_SAMPLES,
                        kernel_variance: float = GAUSSIAN_KERNEL_VARIANCE) -> GaussianExperimentRecord:
    """
    Run GridShift on a seeded Gaussian sample and record spread and cell counts per iteration.

    Args:
        n: Sample size (at least min_samples)
        d: Dimension (at most 5)
        s: Per-axis standard deviation (scalar broadcasts to all axes)
        h: Bandwidth
        seed: Generator seed
        min_samples: Lower bound on n; lower it only for quick tests
        kernel_variance: Kernel variance in units of h^2 for the spread predictions

    Returns:
        GaussianExperimentRecord with one row per grid state, t = 0 being the initial grid
    """
    h = validate_bandwidth(h)
    if n < min_samples:
        raise InvalidParameterError(f"n={n} is below the finite-sample floor of {min_samples}")
    if not 1 <= d <= MAX_DIMENSION:
        raise InvalidParameterError(f"d must lie in [1, {MAX_DIMENSION}], got {d}")
    if not kernel_variance > 0:
        raise InvalidParameterError(f"kernel_variance must be positive, got {kernel_variance}")
    s_vec = np.broadcast_to(np.asarray(s, dtype=float), (d,)).copy()

    X = gaussian_sample(n, s_vec, seed=seed)
    _, trace = engine.run_traced(X, EngineConfig(h=h, max_iterations=get_settings().max_iterations))

    rows = []
    s_hat = None
    for t, grid_map in enumerate(trace.maps):
        s_emp = weighted_axis_std(grid_map)
        s_hat = s_emp if s_hat is None else predict_std(s_hat, h, kernel_variance)
        _, _, counts = grid_map.arrays()
        rows.append(TheoryRow(
            t=t,
            k=len(grid_map),
            k_hat=predict_cells(s_hat, h),
            s_emp=[float(v) for v in s_emp],
            s_hat=[float(v) for v in s_hat],
            largest_share=float(counts.max() / counts.sum()),
        ))

    record = GaussianExperimentRecord(n=n, d=d, s=s_vec.tolist(), h=h, seed=seed,
                                      kernel_variance=kernel_variance,
                                      converged=engine.has_converged(trace.maps[-1]), rows=rows)
    ratio = record.first_step_ratio()
    logger.info("Gaussian experiment n=%d d=%d h=%g: %d iterations, final k=%d (largest cell %.4f), "
                "first-step ratio %s vs predicted %s",
                n, d, h, len(rows) - 1, record.final_k, record.final_largest_share,
                ratio, record.predicted_first_ratio())
    return record


def experiment_csv(record: GaussianExperimentRecord) -> str:
    """CSV with header t,k,k_hat,s_emp_axis0..,s_hat_axis0.."""
    header = ["t", "k", "k_hat"]
    header += [f"s_emp_axis{j}" for j in range(record.d)]
    header += [f"s_hat_axis{j}" for j in range(record.d)]
    lines = [",".join(header)]
    for row in record.rows:
        values = [str(row.t), str(row.k), str(row.k_hat)]
        values += [f"{v:.10g}" for v in row.s_emp]
        values += [f"{v:.10g}" for v in row.s_hat]
        lines.append(",".join(values))
    return "\n".join(lines) + "\n"


def write_experiment_csv(record: GaussianExperimentRecord, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(experiment_csv(record), encoding="utf-8")
    return path


def default_flat_constant(trace: EngineTrace) -> float:
    """Squared diagonal of the bounding box of the initial centroids (1.0 for a single point)."""
    _, centroids, _ = trace.initial.arrays()
    diag2 = float(((centroids.max(axis=0) - centroids.min(axis=0)) ** 2).sum())
    return diag2 if diag2 > 0 else 1.0


def check_descent(trace: EngineTrace, a: Optional[float] = None) -> DescentReport:
    """Replay every sweep of a trace and score each cell update with its neighbors frozen."""
    a = default_flat_constant(trace) if a is None else a
    n_total = trace.initial.total_count
    report = DescentReport()

    for t, grid_map in enumerate(trace.maps[:-1], start=1):
        keys = grid_map.sorted_keys()

        def observe(row, old, new, refs, weights, t=t, keys=keys):
            report.updates += 1
            before = weighted_loss(old, refs, weights, a, n_total)
            after = weighted_loss(new, refs, weights, a, n_total)
            # loss drops by exactly sum(weights) * |new - old|^2
            drop = float(weights.sum() * ((new - old) ** 2).sum())
            moved = drop > 1e-9 * max(before, np.finfo(float).tiny)
            report.moved += int(moved)
            tol = 1e-12 * max(1.0, abs(before))
            if after > before + tol or (moved and after >= before):
                report.violations.append(DescentViolation(
                    iteration=t, cell=list(keys[row]), loss_before=before, loss_after=after,
                    strict=moved,
                ))

        engine.sweep_centroids(grid_map, observer=observe)

    if report.violations:
        logger.warning("Descent check found %d violations in %d updates", len(report.violations), report.updates)
    else:
        logger.info("Descent check passed: %d updates, %d moved", report.updates, report.moved)
    return report


def monotone_cells_report(trace: EngineTrace) -> MonotoneCellsReport:
    """Check that the active cell count never increases along the trace."""
    counts = trace.cell_counts
    non_increasing = all(a >= b for a, b in zip(counts, counts[1:]))
    if not non_increasing:
        logger.warning("Active cell count increased along the trace: %s", counts)
    return MonotoneCellsReport(counts=counts, non_increasing=non_increasing, final_k=counts[-1])
