"""
Data models for clustering validation.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field


@dataclass
class ContingencyTable:
    """Co-occurrence counts n_ij between two labelings."""

    matrix: np.ndarray          # (k_a, k_b) int64

    @property
    def row_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.matrix.sum(axis=0)

    @property
    def n(self) -> int:
        return int(self.matrix.sum())

    def labelings(self) -> tuple[np.ndarray, np.ndarray]:
        """Two label arrays (row index, column index) that reproduce this table."""
        rows, cols = np.indices(self.matrix.shape)
        counts = self.matrix.ravel()
        return np.repeat(rows.ravel(), counts), np.repeat(cols.ravel(), counts)

    def __repr__(self):
        return f"ContingencyTable(shape={self.matrix.shape}, n={self.n})"


class SweepEntry(BaseModel):
    """One evaluated bandwidth of a tuning sweep."""

    h: float
    score: Optional[float] = Field(default=None, description="Silhouette; None when undefined (< 2 clusters)")
    n_clusters: int


class BandwidthSweepResult(BaseModel):
    """Silhouette scores over a bandwidth grid and the selected bandwidth."""

    entries: list[SweepEntry]
    best_h: float
    best_score: float

    @property
    def valid_entries(self) -> list[SweepEntry]:
        return [e for e in self.entries if e.score is not None]


class AgreementScores(BaseModel):
    """External agreement between a clustering and reference labels."""

    ari: float
    ami: float
    fm: float
