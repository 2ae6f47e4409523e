"""
Data models for grid-cell object tracking.
"""

import math
import re
from dataclasses import dataclass
from typing import Optional, Union

from pydantic import BaseModel, Field, field_validator

GridIndex = tuple[int, ...]

_TOP_K = re.compile(r"^top_(\d+)$")


class TrackWindow(BaseModel):
    """Axis-aligned window of centre (cx, cy), length l (x-extent) and width w (y-extent), in pixels."""

    cx: float
    cy: float
    l: float = Field(..., gt=0)
    w: float = Field(..., gt=0)

    def pixel_bounds(self, frame_width: int, frame_height: int) -> Optional[tuple[int, int, int, int]]:
        """Inclusive (x0, y0, x1, y1) of pixels with |x-cx| <= l/2 and |y-cy| <= w/2, clipped to the frame.

        Returns None when the clipped region is empty.
        """
        x0 = max(0, math.ceil(self.cx - self.l / 2))
        x1 = min(frame_width - 1, math.floor(self.cx + self.l / 2))
        y0 = max(0, math.ceil(self.cy - self.w / 2))
        y1 = min(frame_height - 1, math.floor(self.cy + self.w / 2))
        if x0 > x1 or y0 > y1:
            return None
        return x0, y0, x1, y1

    def scaled(self, factor_l: float, factor_w: Optional[float] = None) -> "TrackWindow":
        factor_w = factor_l if factor_w is None else factor_w
        return TrackWindow(cx=self.cx, cy=self.cy, l=self.l * factor_l, w=self.w * factor_w)


@dataclass(frozen=True)
class ReferenceBin:
    """Color-space grid cells that characterize the tracked object."""

    cells: frozenset[GridIndex]

    def __len__(self) -> int:
        return len(self.cells)

    def __repr__(self):
        return f"ReferenceBin({len(self.cells)} cells)"


class TrackerConfig(BaseModel):
    """Tracker parameters."""

    h: float = Field(..., gt=0, description="Color-space bandwidth")
    f: float = Field(default=1.0, ge=1.0, description="Search-region shrink factor")
    eta: float = Field(default=1.0, gt=0, description="Centre convergence tolerance in pixels")
    selection: Union[str, list[int]] = Field(
        default="top_1",
        description="'top_k' for the k largest clusters, or explicit cluster ids",
    )
    max_inner_iters: int = Field(default=20, gt=0)

    @field_validator("selection", mode="before")
    @classmethod
    def parse_selection(cls, v):
        """Accept 'top_k', a list of ids, or a comma-separated id string such as '0,1'."""
        if isinstance(v, str):
            v = v.strip()
            if _TOP_K.match(v):
                if int(_TOP_K.match(v).group(1)) < 1:
                    raise ValueError("top_k needs k >= 1")
                return v
            try:
                return [int(x) for x in v.split(",") if x.strip()]
            except ValueError:
                raise ValueError(f"selection must be 'top_k' or comma-separated cluster ids, got {v!r}")
        return v

    @property
    def top_k(self) -> Optional[int]:
        if isinstance(self.selection, str):
            return int(_TOP_K.match(self.selection).group(1))
        return None


class FrameTrack(BaseModel):
    """Emitted window for one frame."""

    frame: int
    window: TrackWindow
    lost: bool = False
    iterations: int = 0

    def csv_row(self) -> str:
        w = self.window
        return f"{self.frame},{w.cx:.3f},{w.cy:.3f},{w.l:.3f},{w.w:.3f},{int(self.lost)}"
