"""Data models for clustering runs, metrics, imaging, tracking and reports."""

from gridshift.models.clustering import (
    ClusterLabeling,
    EngineConfig,
    IterationRecord,
    KernelParams,
    PointState,
)
from gridshift.models.datasets import GeneratorSpec, LabeledDataset
from gridshift.models.imaging import ImageBuffer, SegmentationResult
from gridshift.models.metrics import AgreementScores, BandwidthSweepResult, ContingencyTable, SweepEntry
from gridshift.models.reports import (
    AlgorithmTiming,
    BenchReport,
    DescentReport,
    DescentViolation,
    GaussianExperimentRecord,
    MonotoneCellsReport,
    ProfileEntry,
    RunConfig,
    TheoryRow,
)
from gridshift.models.tracking import FrameTrack, ReferenceBin, TrackerConfig, TrackWindow

__all__ = [
    "ClusterLabeling",
    "EngineConfig",
    "IterationRecord",
    "KernelParams",
    "PointState",
    "GeneratorSpec",
    "LabeledDataset",
    "ImageBuffer",
    "SegmentationResult",
    "AgreementScores",
    "BandwidthSweepResult",
    "ContingencyTable",
    "SweepEntry",
    "AlgorithmTiming",
    "BenchReport",
    "DescentReport",
    "DescentViolation",
    "GaussianExperimentRecord",
    "MonotoneCellsReport",
    "ProfileEntry",
    "RunConfig",
    "TheoryRow",
    "FrameTrack",
    "ReferenceBin",
    "TrackerConfig",
    "TrackWindow",
]
