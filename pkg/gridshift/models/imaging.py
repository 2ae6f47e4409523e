"""
Data models for image segmentation.
"""

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from gridshift.errors import InvalidInputError

FeatureMode = Literal["rgb", "rgbxy"]


@dataclass
class ImageBuffer:
    """8-bit RGB image stored row-major as a (height, width, 3) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise InvalidInputError(f"expected (height, width, 3) pixels, got shape {self.pixels.shape}")
        if self.pixels.shape[0] < 1 or self.pixels.shape[1] < 1:
            raise InvalidInputError("image has no pixels")
        if self.pixels.dtype != np.uint8:
            self.pixels = self.pixels.astype(np.uint8)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def n_pixels(self) -> int:
        return self.width * self.height

    @classmethod
    def solid(cls, width: int, height: int, color: tuple[int, int, int]) -> "ImageBuffer":
        pixels = np.empty((height, width, 3), dtype=np.uint8)
        pixels[:] = color
        return cls(pixels)

    def __repr__(self):
        return f"ImageBuffer({self.width}x{self.height})"


@dataclass
class SegmentationResult:
    """Per-pixel segment ids, per-segment mean colors and run statistics."""

    label_map: np.ndarray           # (height, width) int64
    colors: np.ndarray              # (n_segments, 3) uint8
    h: float
    mode: FeatureMode
    iterations: int
    converged: bool = True
    runtime_ms: Optional[float] = None

    @property
    def n_segments(self) -> int:
        return int(self.colors.shape[0])

    def sidecar(self, record_timings: bool = True) -> dict:
        """JSON sidecar contents; runtime is null when timings are disabled."""
        runtime = round(self.runtime_ms, 3) if record_timings and self.runtime_ms is not None else None
        return {
            "h": self.h,
            "mode": self.mode,
            "n_segments": self.n_segments,
            "iterations": self.iterations,
            "converged": self.converged,
            "runtime_ms": runtime,
        }

    def __repr__(self):
        height, width = self.label_map.shape
        return f"SegmentationResult({width}x{height}, segments={self.n_segments}, h={self.h}, mode={self.mode})"
