"""
Pixel clustering segmentation.

Pixels become feature vectors (RGB scaled by 1/255, optionally with x, y
scaled to [0, 1]), GridShift clusters them, and every segment is painted with
the RGB part of its cluster centroid.
"""

import logging
from typing import Optional

import numpy as np

from gridshift.config.settings import get_settings
from gridshift.errors import InvalidInputError
from gridshift.models.clustering import EngineConfig
from gridshift.models.imaging import FeatureMode, ImageBuffer, SegmentationResult
from gridshift.models.metrics import AgreementScores
from gridshift.services import engine, metrics
from gridshift.services.grid import validate_bandwidth
from gridshift.utils.timing import Stopwatch

logger = logging.getLogger(__name__)

MODES = ("rgb", "rgbxy")


def pixels_to_features(img: ImageBuffer, mode: FeatureMode = "rgb") -> np.ndarray:
    """Row-major pixel features: RGB/255, plus x/(width-1) and y/(height-1) for rgbxy."""
    if mode not in MODES:
        raise InvalidInputError(f"unknown feature mode {mode!r}; expected one of {MODES}")
    rgb = img.pixels.reshape(-1, 3).astype(float) / 255.0
    if mode == "rgb":
        return rgb
    ys, xs = np.divmod(np.arange(img.n_pixels), img.width)
    x = xs / (img.width - 1) if img.width > 1 else np.zeros(img.n_pixels)
    y = ys / (img.height - 1) if img.height > 1 else np.zeros(img.n_pixels)
    return np.column_stack([rgb, x, y])


def centroid_colors(centroids: np.ndarray) -> np.ndarray:
    """RGB part of centroids mapped back to 0-255, rounded half-up."""
    return np.clip(np.floor(centroids[:, :3] * 255.0 + 0.5), 0, 255).astype(np.uint8)


def segment(img: ImageBuffer, h: float, mode: FeatureMode = "rgb",
            max_iterations: Optional[int] = None) -> SegmentationResult:
    """Segment an image with GridShift at bandwidth h."""
    h = validate_bandwidth(h)
    features = pixels_to_features(img, mode)
    cfg = EngineConfig(h=h, max_iterations=max_iterations or get_settings().max_iterations)
    with Stopwatch() as sw:
        labeling = engine.run(features, cfg)

    result = SegmentationResult(
        label_map=labeling.labels.reshape(img.height, img.width),
        colors=centroid_colors(labeling.centroids),
        h=h,
        mode=mode,
        iterations=labeling.iterations,
        converged=labeling.converged,
        runtime_ms=sw.elapsed_ms,
    )
    logger.info("Segmented %dx%d image into %d segments (h=%g, mode=%s, %.1f ms)",
                img.width, img.height, result.n_segments, h, mode, sw.elapsed_ms)
    return result


def render(result: SegmentationResult, img: ImageBuffer) -> ImageBuffer:
    """Replace every pixel by its segment's mean color."""
    if result.label_map.shape != (img.height, img.width):
        raise InvalidInputError(
            f"label map {result.label_map.shape[::-1]} does not match image {img.width}x{img.height}"
        )
    return ImageBuffer(result.colors[result.label_map])


def score_segmentation(result: SegmentationResult, reference: np.ndarray) -> AgreementScores:
    """Agreement between a segmentation and a reference label map of the same size."""
    reference = np.asarray(reference)
    if reference.shape != result.label_map.shape:
        raise InvalidInputError(
            f"reference label map shape {reference.shape} differs from segmentation {result.label_map.shape}"
        )
    return metrics.agreement(reference.ravel(), result.label_map.ravel())
