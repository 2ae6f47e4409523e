"""
GridShift-based object tracking.

The target is described by a reference bin: the set of color-space grid
cells of the pixels in the selected clusters of the first frame. In every
later frame the window centre moves to the mean position of the pixels whose
color cell is in the bin, the bin is refreshed from those pixels, and each
window side shrinks by 1% while the matched pixels stay clear of both region
borders on that axis, growing by 1% otherwise. When no pixel matches, the window grows by
10% and the search continues.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from gridshift.errors import InvalidInputError, InvalidWindowError, SelectionError
from gridshift.models.clustering import ClusterLabeling, EngineConfig
from gridshift.models.imaging import ImageBuffer
from gridshift.models.tracking import FrameTrack, ReferenceBin, TrackerConfig, TrackWindow
from gridshift.services import engine
from gridshift.utils.image_io import draw_rectangle, save_image

logger = logging.getLogger(__name__)

GROWTH = 1.1
SHRINK = 0.99
EXPAND = 1.01

CSV_HEADER = "frame,cx,cy,l,w,lost"


@dataclass
class TrackingRun:
    """Reference bin from initialization plus one FrameTrack per frame (frame 0 included)."""

    tracks: list[FrameTrack]
    reference: ReferenceBin
    init_labeling: ClusterLabeling
    bins: list[ReferenceBin] = field(default_factory=list)

    @property
    def lost_frames(self) -> list[int]:
        return [t.frame for t in self.tracks if t.lost]

    def to_csv(self) -> str:
        return "\n".join([CSV_HEADER] + [t.csv_row() for t in self.tracks]) + "\n"


def _color_cells(pixels: np.ndarray, h: float) -> np.ndarray:
    """Grid index of every pixel color (RGB/255) as an (..., 3) int64 array."""
    return np.floor(pixels.astype(float) / 255.0 / h).astype(np.int64)


def _cell_codes(cells: np.ndarray, h: float) -> np.ndarray:
    """Pack color cell indices into scalar codes; indices lie in [0, floor(1/h)]."""
    side = int(np.floor(1.0 / h)) + 1
    return (cells[..., 0] * side + cells[..., 1]) * side + cells[..., 2]


def _bin_from_codes(codes: np.ndarray, h: float) -> ReferenceBin:
    side = int(np.floor(1.0 / h)) + 1
    r, rest = np.divmod(codes, side * side)
    g, b = np.divmod(rest, side)
    return ReferenceBin(frozenset(zip(r.tolist(), g.tolist(), b.tolist())))


def _bin_codes(ref: ReferenceBin, h: float) -> np.ndarray:
    cells = np.array(sorted(ref.cells), dtype=np.int64).reshape(-1, 3)
    return _cell_codes(cells, h)


def select_clusters(labeling: ClusterLabeling, cfg: TrackerConfig) -> list[int]:
    """Cluster ids chosen by the selection policy: k largest (ties by id) or explicit ids."""
    k = cfg.top_k
    if k is not None:
        sizes = labeling.cluster_sizes
        order = sorted(range(labeling.n_clusters), key=lambda c: (-sizes[c], c))
        return sorted(order[:k])
    ids = sorted(set(cfg.selection))
    missing = [c for c in ids if not 0 <= c < labeling.n_clusters]
    if not ids or missing:
        raise SelectionError(
            f"selection {cfg.selection} does not match the {labeling.n_clusters} clusters in the window"
        )
    return ids


def init_tracker(frame0: ImageBuffer, window: TrackWindow,
                 cfg: TrackerConfig) -> tuple[ReferenceBin, ClusterLabeling]:
    """Cluster the colors inside the window and build the reference bin from the selected clusters."""
    bounds = window.pixel_bounds(frame0.width, frame0.height)
    if bounds is None:
        raise InvalidWindowError(
            f"window centre ({window.cx}, {window.cy}) size {window.l}x{window.w} "
            f"lies outside the {frame0.width}x{frame0.height} frame"
        )
    x0, y0, x1, y1 = bounds
    patch = frame0.pixels[y0:y1 + 1, x0:x1 + 1].reshape(-1, 3)
    labeling = engine.run(patch.astype(float) / 255.0, EngineConfig(h=cfg.h))

    selected = select_clusters(labeling, cfg)
    chosen = np.isin(labeling.labels, selected)
    codes = np.unique(_cell_codes(_color_cells(patch[chosen], cfg.h), cfg.h))
    reference = _bin_from_codes(codes, cfg.h)
    logger.info("Tracker initialized: %d clusters in window, selected %s, %d reference cells",
                labeling.n_clusters, selected, len(reference))
    return reference, labeling


def _size_factor(coords: np.ndarray, span: int) -> float:
    """Shrink when the matched extent lies strictly inside the search region on this axis, else expand.

    Coordinates are relative to the region, whose pixels run from 0 to span.
    Matches touching a border mean the object reaches the window edge there.
    """
    inside = coords.min() > 0 and coords.max() < span
    return SHRINK if inside else EXPAND


def _track_codes(frame_codes: np.ndarray, window: TrackWindow, bin_codes: np.ndarray,
                 cfg: TrackerConfig) -> tuple[TrackWindow, np.ndarray, bool, int]:
    height, width = frame_codes.shape
    cx, cy, l, w = window.cx, window.cy, window.l, window.w
    matched = False
    iterations = 0
    for _ in range(cfg.max_inner_iters):
        iterations += 1
        search = TrackWindow(cx=cx, cy=cy, l=l / cfg.f, w=w / cfg.f)
        bounds = search.pixel_bounds(width, height)
        hits = None
        if bounds is not None:
            x0, y0, x1, y1 = bounds
            region = frame_codes[y0:y1 + 1, x0:x1 + 1]
            mask = np.isin(region, bin_codes)
            if mask.any():
                ys, xs = np.nonzero(mask)
                hits = (xs, ys, region[mask], x1 - x0, y1 - y0)
        if hits is None:
            l *= GROWTH
            w *= GROWTH
            continue

        matched = True
        xs, ys, codes, span_x, span_y = hits
        new_cx, new_cy = float(xs.mean() + x0), float(ys.mean() + y0)
        bin_codes = np.unique(codes)
        l *= _size_factor(xs, span_x)
        w *= _size_factor(ys, span_y)
        displacement = float(np.hypot(new_cx - cx, new_cy - cy))
        cx, cy = new_cx, new_cy
        if displacement < cfg.eta:
            break

    return TrackWindow(cx=cx, cy=cy, l=l, w=w), bin_codes, not matched, iterations


def track_frame(frame: ImageBuffer, window: TrackWindow, ref: ReferenceBin,
                cfg: TrackerConfig) -> tuple[TrackWindow, ReferenceBin, bool]:
    """Relocate and resize the window on one frame.

    Returns the emitted window, the refreshed reference bin and a lost flag
    (no pixel matched in any inner iteration; the window is returned grown
    and the bin unchanged).
    """
    frame_codes = _cell_codes(_color_cells(frame.pixels, cfg.h), cfg.h)
    new_window, codes, lost, _ = _track_codes(frame_codes, window, _bin_codes(ref, cfg.h), cfg)
    new_ref = ref if lost else _bin_from_codes(codes, cfg.h)
    return new_window, new_ref, lost


def track_sequence(frames: Sequence[ImageBuffer], window: TrackWindow, cfg: TrackerConfig) -> TrackingRun:
    """Initialize on frames[0] and track through the remaining frames."""
    if len(frames) < 2:
        raise InvalidInputError(f"tracking needs at least 2 frames, got {len(frames)}")
    size = (frames[0].width, frames[0].height)
    for i, frame in enumerate(frames):
        if (frame.width, frame.height) != size:
            raise InvalidInputError(
                f"frame {i} is {frame.width}x{frame.height}, expected {size[0]}x{size[1]}"
            )

    reference, labeling = init_tracker(frames[0], window, cfg)
    tracks = [FrameTrack(frame=0, window=window, lost=False)]
    bins = [reference]
    current_window, current_bin = window, _bin_codes(reference, cfg.h)
    for i, frame in enumerate(frames[1:], start=1):
        frame_codes = _cell_codes(_color_cells(frame.pixels, cfg.h), cfg.h)
        current_window, current_bin, lost, iterations = _track_codes(frame_codes, current_window, current_bin, cfg)
        if lost:
            logger.warning("Frame %d: target lost, window grown to %.1fx%.1f",
                           i, current_window.l, current_window.w)
        tracks.append(FrameTrack(frame=i, window=current_window, lost=lost, iterations=iterations))
        bins.append(_bin_from_codes(current_bin, cfg.h))

    logger.info("Tracked %d frames (%d lost)", len(frames) - 1, sum(t.lost for t in tracks))
    return TrackingRun(tracks=tracks, reference=reference, init_labeling=labeling, bins=bins)


def write_annotated_frames(frames: Sequence[ImageBuffer], run: TrackingRun,
                           directory: Union[str, Path]) -> list[Path]:
    """Save every frame as PNG with its emitted window drawn as a rectangle outline."""
    directory = Path(directory)
    paths = []
    for track in run.tracks:
        frame = frames[track.frame]
        bounds = track.window.pixel_bounds(frame.width, frame.height)
        annotated = draw_rectangle(frame, bounds) if bounds is not None else frame
        paths.append(save_image(annotated, directory / f"frame_{track.frame:05d}.png"))
    return paths
