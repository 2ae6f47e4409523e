"""
Data models for clustering runs.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field


class EngineConfig(BaseModel):
    """Parameters of one GridShift run."""

    h: float = Field(..., gt=0, description="Side length of grid cells (bandwidth)")
    max_iterations: int = Field(default=1000, gt=0, description="Safety cap on shift iterations")
    record_history: bool = Field(default=True, description="Keep per-iteration statistics")


class KernelParams(BaseModel):
    """Parameters of the grid-local quadratic kernel."""

    h: float = Field(..., gt=0)
    a: float = Field(..., gt=0, description="Flat-region constant; must dominate in-neighborhood squared distances")

    @classmethod
    def default_for(cls, h: float, d: int) -> "KernelParams":
        """Use a = (3h*sqrt(d))^2, the largest squared distance two 1-neighbors can have."""
        return cls(h=h, a=(3.0 * h) ** 2 * d)


@dataclass
class IterationRecord:
    """Statistics of one completed shift iteration."""

    t: int
    active_cells: int      # m after the iteration
    max_shift: float       # largest centroid (or point) displacement in the iteration

    def as_dict(self) -> dict:
        return {"t": self.t, "active_cells": self.active_cells, "max_shift": self.max_shift}


@dataclass
class ClusterLabeling:
    """Output of any clustering run: one label per point plus per-cluster centroids."""

    labels: np.ndarray              # (n,) int, values 0..k-1
    centroids: np.ndarray           # (k, d)
    iterations: int
    converged: bool = True
    initial_cells: int = 0
    history: list[IterationRecord] = field(default_factory=list)
    h: Optional[float] = None

    @property
    def n_clusters(self) -> int:
        return int(self.centroids.shape[0])

    @property
    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_clusters)

    @property
    def m_avg(self) -> float:
        """Mean number of active cells processed per iteration.

        Iteration t processes the cells left by iteration t-1, so the series is
        the initial count followed by every history entry except the last.
        """
        if not self.history:
            return float(self.initial_cells)
        processed = [self.initial_cells] + [r.active_cells for r in self.history[:-1]]
        return float(np.mean(processed))

    def __repr__(self):
        return (
            f"ClusterLabeling(n={self.labels.shape[0]}, k={self.n_clusters}, "
            f"iterations={self.iterations}, converged={self.converged})"
        )


@dataclass
class PointState:
    """Current shifted locations of every point in a per-point mean shift."""

    positions: np.ndarray           # (n, d) float
    original_index: np.ndarray      # (n,) int

    @classmethod
    def from_dataset(cls, X: np.ndarray) -> "PointState":
        return cls(positions=np.array(X, dtype=float, copy=True), original_index=np.arange(X.shape[0]))
