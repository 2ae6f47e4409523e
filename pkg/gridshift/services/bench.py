"""
Runtime benchmarks and bandwidth profiles for GridShift and the baselines.

Only the clustering call is timed; data generation, normalization and file
I/O are excluded. Each algorithm runs ``repeats`` times sequentially and the
median wall time is reported.
"""

import logging
import statistics
from typing import Callable, Sequence

import numpy as np
from tqdm import tqdm

from gridshift.config.settings import get_settings
from gridshift.errors import InvalidParameterError, OracleScaleError
from gridshift.models.clustering import ClusterLabeling
from gridshift.models.reports import AlgorithmTiming, BenchReport, ProfileEntry
from gridshift.services import baselines, engine, metrics
from gridshift.services.grid import as_dataset, validate_bandwidth
from gridshift.utils.timing import Stopwatch

logger = logging.getLogger(__name__)

ALGORITHMS: dict[str, Callable[[np.ndarray, float], ClusterLabeling]] = {
    "gridshift": engine.cluster,
    "mspp": baselines.mspp_run,
    "vanilla_ms": baselines.vanilla_ms_run,
}


def _check_algorithms(algos: Sequence[str], n: int) -> list[str]:
    algos = list(dict.fromkeys(algos))
    unknown = [a for a in algos if a not in ALGORITHMS]
    if unknown or not algos:
        raise InvalidParameterError(f"unknown algorithm(s) {unknown}; choose from {sorted(ALGORITHMS)}")
    cap = get_settings().vanilla_ms_max_points
    if "vanilla_ms" in algos and n > cap:
        raise OracleScaleError(
            f"vanilla_ms is an O(n^2) oracle limited to {cap} points; the dataset has {n}. "
            f"Drop it from --algos or raise GRIDSHIFT_VANILLA_MS_MAX_POINTS."
        )
    return algos


def run_bench(X, h: float, algos: Sequence[str] = ("gridshift", "mspp"), repeats: int = 1,
              seed: int = 0, record_timings: bool = True) -> BenchReport:
    """
    Time each algorithm on X.

    Args:
        X: (n, d) dataset
        h: Bandwidth shared by all algorithms
        algos: Subset of ALGORITHMS
        repeats: Runs per algorithm; the median time is reported
        seed: Recorded in the report (the dataset generator's seed)
        record_timings: When False, times and speedups are left empty

    Returns:
        BenchReport with per-algorithm timings and '<slower>/<faster>' speedups
    """
    X = as_dataset(X)
    h = validate_bandwidth(h)
    if repeats < 1:
        raise InvalidParameterError(f"repeats must be at least 1, got {repeats}")
    algos = _check_algorithms(algos, X.shape[0])

    results = []
    for name in algos:
        samples = []
        labeling = None
        for _ in tqdm(range(repeats), desc=f"bench {name}", unit="run", disable=repeats == 1):
            with Stopwatch() as sw:
                labeling = ALGORITHMS[name](X, h)
            samples.append(sw.elapsed_ms)
        median = statistics.median(samples)
        logger.info("%s: median %.1f ms over %d run(s), %d clusters, %d iterations",
                    name, median, repeats, labeling.n_clusters, labeling.iterations)
        results.append(AlgorithmTiming(
            algorithm=name,
            samples_ms=[round(s, 3) for s in samples] if record_timings else None,
            median_ms=round(median, 3) if record_timings else None,
            iterations=labeling.iterations,
            n_clusters=labeling.n_clusters,
            converged=labeling.converged,
            m_avg=labeling.m_avg if name == "gridshift" else None,
        ))

    speedups = {}
    if record_timings:
        timed = {r.algorithm: r.median_ms for r in results}
        if "gridshift" in timed:
            for other in ("mspp", "vanilla_ms"):
                if other in timed and timed["gridshift"] > 0:
                    speedups[f"{other}/gridshift"] = round(timed[other] / timed["gridshift"], 3)

    gs = next((r for r in results if r.algorithm == "gridshift"), None)
    return BenchReport(
        n=X.shape[0],
        d=X.shape[1],
        h=h,
        seed=seed,
        repeats=repeats,
        results=results,
        speedups=speedups,
        m_avg_over_n=gs.m_avg / X.shape[0] if gs is not None else None,
    )


def bandwidth_profile(X, labels_true, h_grid: Sequence[float],
                      algos: Sequence[str] = ("gridshift", "mspp"),
                      record_timings: bool = True) -> list[ProfileEntry]:
    """ARI, AMI and runtime of each algorithm over a range of bandwidths."""
    X = as_dataset(X)
    labels_true = np.asarray(labels_true)
    if not h_grid:
        raise InvalidParameterError("bandwidth grid is empty")
    algos = _check_algorithms(algos, X.shape[0])

    entries = []
    for h in tqdm(list(h_grid), desc="bandwidth profile", unit="h"):
        h = validate_bandwidth(h)
        for name in algos:
            with Stopwatch() as sw:
                labeling = ALGORITHMS[name](X, h)
            scores = metrics.agreement(labels_true, labeling.labels)
            entries.append(ProfileEntry(
                algorithm=name,
                h=h,
                n_clusters=labeling.n_clusters,
                ari=scores.ari,
                ami=scores.ami,
                runtime_ms=round(sw.elapsed_ms, 3) if record_timings else None,
            ))
    return entries

