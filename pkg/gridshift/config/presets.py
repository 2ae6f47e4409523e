"""
Benchmark dataset presets.

Each preset records the shape of a standard low-dimensional clustering dataset,
the silhouette-tuned bandwidths reported for GridShift and the two grid mean
shift baselines, and the reference GridShift scores against ground truth.
"""

from typing import Literal, Optional
from pydantic import BaseModel, Field


class ReferenceScores(BaseModel):
    """Published GridShift agreement with ground-truth labels."""

    ari: float = Field(..., description="Adjusted Rand Index")
    ami: float = Field(..., description="Adjusted Mutual Information")


class TunedBandwidths(BaseModel):
    """Silhouette-tuned bandwidth per algorithm on the preset's scaled features."""

    gridshift: float = Field(..., gt=0, le=1)
    mspp: float = Field(..., gt=0, le=1)
    alpha_mspp: float = Field(..., gt=0, le=1, description="Recorded for reference only; not implemented")


class DatasetPreset(BaseModel):
    """Complete description of one benchmark dataset."""

    name: str
    description: str
    n: int = Field(..., gt=0, description="Number of data points")
    d: int = Field(..., gt=0, description="Number of features")
    k: int = Field(..., gt=0, description="Number of ground-truth clusters")
    bandwidths: TunedBandwidths
    reference: ReferenceScores
    source: Literal["bundled", "external"] = Field(
        default="external",
        description="'bundled' datasets ship with the toolkit (via scikit-learn); "
                    "'external' ones must be supplied as CSV",
    )
    label_column: Optional[int] = Field(
        default=None,
        description="Index of the ground-truth label column in the exported CSV",
    )
    filename: Optional[str] = Field(
        default=None,
        description="File name of an external dataset under Settings.data_path",
    )
    scaling: Literal["minmax", "none"] = Field(
        default="minmax",
        description="Feature scaling the reference bandwidths were tuned on",
    )


def _preset(name, description, n, d, k, h, ari, ami, **kwargs) -> DatasetPreset:
    return DatasetPreset(
        name=name,
        description=description,
        n=n,
        d=d,
        k=k,
        bandwidths=TunedBandwidths(gridshift=h[0], mspp=h[1], alpha_mspp=h[2]),
        reference=ReferenceScores(ari=ari, ami=ami),
        **kwargs,
    )


PRESETS = {
    p.name: p
    for p in [
        _preset("phone-gyroscope", "Smartphone gyroscope activity readings",
                13932632, 3, 7, (0.68, 0.65, 0.67), 0.2401, 0.1837),
        _preset("phone-accelerometer", "Smartphone accelerometer activity readings",
                13062475, 3, 7, (0.55, 0.53, 0.58), 0.0899, 0.1923),
        _preset("watch-accelerometer", "Smartwatch accelerometer activity readings",
                3540962, 3, 7, (0.72, 0.72, 0.72), 0.1001, 0.2314),
        _preset("watch-gyroscope", "Smartwatch gyroscope activity readings",
                3205431, 3, 7, (0.45, 0.42, 0.46), 0.1623, 0.1422),
        _preset("still", "Still-activity sensor readings",
                949983, 3, 6, (0.25, 0.25, 0.25), 0.7896, 0.8602),
        _preset("skin", "Skin segmentation RGB samples",
                245057, 3, 2, (0.84, 0.84, 0.83), 0.3266, 0.4251),
        _preset("wall-robot", "Wall-following robot navigation sensors",
                5456, 4, 4, (0.38, 0.38, 0.38), 0.1801, 0.3356),
        _preset("sleep-data", "Sleep study measurements",
                1024, 2, 2, (0.55, 0.51, 0.53), 0.1201, 0.1117),
        _preset("balance-scale", "Balance scale weight and distance",
                625, 4, 3, (0.62, 0.61, 0.62), 0.0799, 0.2301),
        _preset("user-knowledge", "Student knowledge modelling",
                403, 5, 5, (0.78, 0.78, 0.78), 0.3403, 0.4108),
        _preset("vinnie", "Vinnie Johnson shooting records",
                380, 2, 2, (0.80, 0.80, 0.80), 0.4568, 0.3665),
        _preset("prnn", "Ripley's two-class synthetic data (pattern recognition and neural networks)",
                250, 2, 2, (0.43, 0.43, 0.43), 0.2093, 0.2913, label_column=2, filename="synth.tr"),
        _preset("iris", "Fisher's Iris flower measurements",
                150, 4, 3, (0.78, 0.77, 0.77), 0.6246, 0.8014, source="bundled", label_column=4,
                scaling="none"),
        _preset("transplant", "Transplant centre outcomes",
                131, 3, 2, (0.48, 0.49, 0.48), 0.7524, 0.7248, label_column=3),
    ]
}


def get_preset(name: str) -> DatasetPreset:
    """
    Get a dataset preset by name.

    Args:
        name: Preset name (e.g., "iris")

    Returns:
        DatasetPreset description

    Raises:
        ValueError: If preset name is not found
    """
    if name not in PRESETS:
        available = ", ".join(PRESETS.keys())
        raise ValueError(f"Unknown preset '{name}'. Available: {available}")

    return PRESETS[name]


def list_presets() -> list[str]:
    """List all available preset names."""
    return list(PRESETS.keys())
