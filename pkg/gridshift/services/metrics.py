"""
Clustering validation metrics and silhouette-driven bandwidth tuning.

External indices (ARI, AMI, Fowlkes-Mallows) take a contingency table and are
computed with ``sklearn.metrics.cluster``. Degenerate cases follow fixed
conventions: ARI of two labelings with no informative pairs is 1.0, AMI with
a zero denominator is 0.0 and FM with a zero denominator is 0.0.
"""

import logging
from typing import Callable, Optional, Sequence

import numpy as np
from sklearn.metrics import silhouette_score
from sklearn.metrics.cluster import (
    adjusted_mutual_info_score,
    adjusted_rand_score,
    contingency_matrix,
    entropy,
    expected_mutual_information,
    fowlkes_mallows_score,
    mutual_info_score,
)
from tqdm import tqdm

from gridshift.config.settings import get_settings
from gridshift.errors import (
    EmptyInputError,
    InvalidInputError,
    InvalidParameterError,
    TuningError,
    UndefinedScoreError,
)
from gridshift.models.clustering import ClusterLabeling
from gridshift.models.metrics import AgreementScores, BandwidthSweepResult, ContingencyTable, SweepEntry
from gridshift.services.grid import as_dataset

logger = logging.getLogger(__name__)

Clusterer = Callable[[np.ndarray, float], ClusterLabeling]


def contingency(labels_a, labels_b) -> ContingencyTable:
    """Count points per (label in a, label in b) pair. Rows and columns follow sorted label values."""
    a = np.asarray(labels_a).ravel()
    b = np.asarray(labels_b).ravel()
    if a.shape[0] != b.shape[0]:
        raise InvalidInputError(f"labelings differ in length: {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] == 0:
        raise EmptyInputError("labelings are empty")
    return ContingencyTable(matrix=np.asarray(contingency_matrix(a, b), dtype=np.int64))


def _require_pairs(table: ContingencyTable) -> int:
    n = table.n
    if n < 2:
        raise InvalidInputError(f"agreement scores need at least 2 points, got {n}")
    return n


def ari(table: ContingencyTable) -> float:
    """Adjusted Rand Index (Hubert-Arabie)."""
    _require_pairs(table)
    return float(adjusted_rand_score(*table.labelings()))


def mutual_info(table: ContingencyTable) -> float:
    return float(mutual_info_score(None, None, contingency=table.matrix))


def expected_mutual_info(table: ContingencyTable) -> float:
    """Expected mutual information under the hypergeometric model of random labelings."""
    return float(expected_mutual_information(table.matrix, table.n))


def ami(table: ContingencyTable) -> float:
    """Adjusted Mutual Information with arithmetic-mean entropy normalization.

    Returns 0.0 when the normalizer equals the expected mutual information
    (both labelings constant, or both all-singleton), where scikit-learn
    reports 1.0.
    """
    _require_pairs(table)
    a, b = table.labelings()
    denominator = (entropy(a) + entropy(b)) / 2 - expected_mutual_info(table)
    if abs(denominator) < 1e-12:
        return 0.0
    return float(adjusted_mutual_info_score(a, b, average_method="arithmetic"))


def fowlkes_mallows(table: ContingencyTable) -> float:
    """TP / sqrt((TP + FP)(TP + FN)) over point pairs; 0.0 when either side has no same-cluster pair."""
    _require_pairs(table)
    return float(fowlkes_mallows_score(*table.labelings()))


def agreement(labels_true, labels_pred) -> AgreementScores:
    """ARI, AMI and FM of a predicted labeling against reference labels."""
    table = contingency(labels_true, labels_pred)
    return AgreementScores(ari=ari(table), ami=ami(table), fm=fowlkes_mallows(table))


def silhouette(X, labels) -> float:
    """Mean silhouette over all points with Euclidean distances.

    Points in singleton clusters contribute 0.

    Raises:
        UndefinedScoreError: If the labeling has fewer than 2 clusters
    """
    X = as_dataset(X)
    labels = np.asarray(labels).ravel()
    if labels.shape[0] != X.shape[0]:
        raise InvalidInputError(f"{labels.shape[0]} labels for {X.shape[0]} points")
    k = np.unique(labels).shape[0]
    if k < 2:
        raise UndefinedScoreError(f"silhouette needs at least 2 clusters, got {k}")
    if k == X.shape[0]:
        return 0.0
    return float(silhouette_score(X, labels, metric="euclidean"))


def silhouette_subsampled(X, labels, cap: int, seed: int = 0) -> float:
    """Silhouette on a seeded uniform subsample of min(n, cap) points."""
    if cap < 2:
        raise InvalidParameterError(f"silhouette cap must be at least 2, got {cap}")
    X = as_dataset(X)
    labels = np.asarray(labels).ravel()
    n = X.shape[0]
    if n <= cap:
        return silhouette(X, labels)
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(n, size=cap, replace=False))
    return silhouette(X[idx], labels[idx])


def tune_bandwidth(X, clusterer: Clusterer, h_grid: Optional[Sequence[float]] = None,
                   cap: Optional[int] = None, seed: Optional[int] = None,
                   progress: bool = True) -> BandwidthSweepResult:
    """
    Pick the bandwidth with the highest silhouette.

    Args:
        X: (n, d) dataset, normalized to [0, 1]
        clusterer: Callable (X, h) -> ClusterLabeling
        h_grid: Bandwidths in (0, 1]; defaults to ``Settings.tuning_grid``
        cap: Subsample size for the silhouette; defaults to ``Settings.silhouette_cap``
        seed: Subsampling seed; defaults to ``Settings.seed``
        progress: Show a progress bar

    Returns:
        BandwidthSweepResult; ties go to the smallest h

    Raises:
        TuningError: If no bandwidth yields at least 2 clusters
    """
    settings = get_settings()
    h_grid = list(settings.tuning_grid if h_grid is None else h_grid)
    cap = settings.silhouette_cap if cap is None else cap
    seed = settings.seed if seed is None else seed
    if not h_grid:
        raise InvalidParameterError("bandwidth grid is empty")
    for h in h_grid:
        if not 0.0 < h <= 1.0:
            raise InvalidParameterError(f"bandwidth grid values must lie in (0, 1], got {h}")

    X = as_dataset(X)
    entries: list[SweepEntry] = []
    for h in tqdm(sorted(h_grid), desc="Tuning bandwidth", unit="h", disable=not progress):
        labeling = clusterer(X, h)
        try:
            score = silhouette_subsampled(X, labeling.labels, cap, seed)
        except UndefinedScoreError:
            score = None
            logger.debug("h=%g: %d cluster(s), silhouette undefined", h, labeling.n_clusters)
        entries.append(SweepEntry(h=h, score=score, n_clusters=labeling.n_clusters))

    valid = [e for e in entries if e.score is not None]
    if not valid:
        raise TuningError(f"no bandwidth in the grid produced at least 2 clusters ({len(entries)} tried)")
    best = min(valid, key=lambda e: (-e.score, e.h))
    logger.info("Best bandwidth h=%g (silhouette=%.4f, %d clusters)", best.h, best.score, best.n_clusters)
    return BandwidthSweepResult(entries=entries, best_h=best.h, best_score=best.score)
