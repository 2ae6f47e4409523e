"""
Data models for datasets and synthetic generators.
"""

from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field


@dataclass
class LabeledDataset:
    """Feature matrix with optional ground-truth labels."""

    X: np.ndarray                           # (n, d) float
    labels: Optional[np.ndarray] = None     # (n,) int codes
    feature_names: list[str] = field(default_factory=list)
    label_names: list[str] = field(default_factory=list)   # original label value per code
    name: str = ""

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def d(self) -> int:
        return int(self.X.shape[1])

    def __repr__(self):
        labeled = "labeled" if self.labels is not None else "unlabeled"
        return f"LabeledDataset(name={self.name!r}, n={self.n}, d={self.d}, {labeled})"


class GeneratorSpec(BaseModel):
    """Seeded synthetic data generator, parsed from e.g. ``gmm:n=100000,d=3,k=10``."""

    kind: Literal["gmm", "groups"] = "gmm"
    n: int = Field(..., gt=0, description="Total number of points")
    d: int = Field(default=2, gt=0, le=12, description="Dimension")
    k: int = Field(default=3, gt=0, description="Number of components")
    spread: float = Field(default=0.03, gt=0, description="Per-axis component standard deviation")
    seed: Optional[int] = Field(default=None, ge=0, description="Overrides the run seed when set")
