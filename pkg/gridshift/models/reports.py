"""
Report models for the theory checks and benchmarks, plus the validated CLI request.
"""

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

Algorithm = Literal["gridshift", "mspp", "vanilla_ms"]


class TheoryRow(BaseModel):
    """State after iteration t (t = 0 is the initial grid) and the predicted values for it."""

    t: int
    k: int = Field(..., description="Active cell count")
    k_hat: int = Field(..., description="Predicted active cell count")
    s_emp: list[float] = Field(..., description="Count-weighted per-axis stddev of centroids")
    s_hat: list[float] = Field(..., description="Predicted per-axis stddev")
    largest_share: float = Field(1.0, description="Fraction of points in the most populated cell")


class GaussianExperimentRecord(BaseModel):
    """One Gaussian shrinkage experiment."""

    n: int
    d: int
    s: list[float]
    h: float
    seed: int
    kernel_variance: float = Field(2.25, description="Kernel variance in units of h^2 used by the predictions")
    converged: bool = Field(True, description="Every surviving cell is isolated from the others")
    rows: list[TheoryRow]

    @property
    def k_non_increasing(self) -> bool:
        ks = [r.k for r in self.rows]
        return all(a >= b for a, b in zip(ks, ks[1:]))

    @property
    def final_k(self) -> int:
        return self.rows[-1].k

    def first_step_ratio(self) -> Optional[list[float]]:
        """Empirical s_1 / s_0 per axis; None when the run stopped after the initial grid."""
        if len(self.rows) < 2:
            return None
        s0, s1 = self.rows[0].s_emp, self.rows[1].s_emp
        return [b / a if a > 0 else 0.0 for a, b in zip(s0, s1)]

    @property
    def final_largest_share(self) -> float:
        return self.rows[-1].largest_share

    def predicted_first_ratio(self) -> list[float]:
        s0 = self.rows[0].s_emp
        s1 = self.rows[1].s_hat if len(self.rows) > 1 else s0
        return [b / a if a > 0 else 0.0 for a, b in zip(s0, s1)]


class DescentViolation(BaseModel):
    """A cell update whose loss did not decrease as required."""

    iteration: int
    cell: list[int]
    loss_before: float
    loss_after: float
    strict: bool = Field(..., description="True when the centroid moved but the loss did not drop")


class DescentReport(BaseModel):
    """Outcome of replaying every sweep of a trace against the weighted loss."""

    updates: int = 0
    moved: int = 0
    violations: list[DescentViolation] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


class MonotoneCellsReport(BaseModel):
    """Active cell counts over a trace."""

    counts: list[int]
    non_increasing: bool
    final_k: int


class AlgorithmTiming(BaseModel):
    """Repeated timing of one algorithm."""

    algorithm: Algorithm
    samples_ms: Optional[list[float]] = None
    median_ms: Optional[float] = None
    iterations: int
    n_clusters: int
    converged: bool
    m_avg: Optional[float] = Field(default=None, description="Mean active cells per iteration (gridshift)")


class BenchReport(BaseModel):
    """Benchmark of several algorithms on one dataset."""

    n: int
    d: int
    h: float
    seed: int
    repeats: int
    results: list[AlgorithmTiming]
    speedups: dict[str, float] = Field(default_factory=dict, description="'<slower>/<faster>' time ratios")
    m_avg_over_n: Optional[float] = None


class ProfileEntry(BaseModel):
    """Agreement and runtime of one algorithm at one bandwidth."""

    algorithm: Algorithm
    h: float
    n_clusters: int
    ari: float
    ami: float
    runtime_ms: Optional[float] = None


class RunConfig(BaseModel):
    """Validated command-line request.

    Only cross-flag consistency is checked here; values such as the bandwidth
    are validated by the services that consume them.
    """

    subcommand: Literal["cluster", "tune", "segment", "track", "bench", "theory"]
    inputs: list[str] = Field(default_factory=list)
    h: Optional[float] = None
    h_grid: Optional[list[float]] = None
    tune: bool = False
    mode: Optional[str] = None
    seed: int = 0
    output: Optional[str] = None
    label_col: Optional[str] = None
    normalize: bool = True
    record_timings: bool = True

    @model_validator(mode="after")
    def check_flags(self):
        if self.subcommand == "cluster" and self.tune == (self.h is not None):
            raise ValueError("cluster needs exactly one of --h and --tune")
        if self.subcommand in ("segment", "track", "theory") and self.h is None:
            raise ValueError(f"{self.subcommand} needs --h")
        if self.subcommand == "bench" and self.h is None and not self.h_grid:
            raise ValueError("bench needs --h (or --h-grid for a profile)")
        if self.h_grid is not None and not self.h_grid:
            raise ValueError("--h-grid must list at least one bandwidth")
        if self.subcommand in ("cluster", "tune", "segment", "track") and len(self.inputs) != 1:
            raise ValueError(f"{self.subcommand} takes exactly one input")
        return self
