"""Unit tests for pixel clustering segmentation."""

import numpy as np
import pytest

from gridshift.errors import InvalidBandwidthError, InvalidInputError
from gridshift.models.imaging import ImageBuffer
from gridshift.services import segmentation
from gridshift.utils import image_io


def _quadrant_labels():
    labels = np.zeros((8, 8), dtype=np.int64)
    labels[:4, 4:] = 1
    labels[4:, :4] = 2
    labels[4:, 4:] = 3
    return labels


def test_pixels_to_features_rgb(quadrant_image):
    X = segmentation.pixels_to_features(quadrant_image, "rgb")

    assert X.shape == (64, 3)
    assert X[0].tolist() == [1.0, 0.0, 0.0]
    assert X[63].tolist() == [1.0, 1.0, 0.0]


def test_pixels_to_features_rgbxy(quadrant_image):
    X = segmentation.pixels_to_features(quadrant_image, "rgbxy")

    assert X.shape == (64, 5)
    assert X[7, 3:].tolist() == [1.0, 0.0]     # row 0, last column
    assert X[56, 3:].tolist() == [0.0, 1.0]    # last row, first column


def test_pixels_to_features_single_pixel():
    X = segmentation.pixels_to_features(ImageBuffer.solid(1, 1, (10, 20, 30)), "rgbxy")
    assert X[0, 3:].tolist() == [0.0, 0.0]


def test_unknown_mode(quadrant_image):
    with pytest.raises(InvalidInputError):
        segmentation.pixels_to_features(quadrant_image, "hsv")


def test_centroid_colors_scale_and_round():
    colors = segmentation.centroid_colors(np.array([[0.5, 1.0, 0.0, 0.3, 0.9], [0.2, 0.0, 1.0, 0.0, 0.0]]))
    assert colors.tolist() == [[128, 255, 0], [51, 0, 255]]


class TestSegment:
    def test_four_quadrants(self, quadrant_image):
        result = segmentation.segment(quadrant_image, 0.1)

        assert result.n_segments == 4
        assert result.converged
        assert result.label_map.shape == (8, 8)
        assert segmentation.score_segmentation(result, _quadrant_labels()).ari == pytest.approx(1.0)

    def test_render_reproduces_flat_regions(self, quadrant_image):
        result = segmentation.segment(quadrant_image, 0.1)
        rendered = segmentation.render(result, quadrant_image)
        assert np.array_equal(rendered.pixels, quadrant_image.pixels)

    def test_solid_image_is_one_segment(self):
        img = ImageBuffer.solid(5, 3, (12, 200, 77))
        result = segmentation.segment(img, 0.05)

        assert result.n_segments == 1
        assert result.colors.tolist() == [[12, 200, 77]]
        assert np.array_equal(segmentation.render(result, img).pixels, img.pixels)

    @pytest.mark.parametrize("h, n_segments", [(0.05, 15), (0.5, 1)])
    def test_solid_image_rgbxy_segments_follow_pixel_spacing(self, h, n_segments):
        # x steps by 0.25 and y by 0.5, so at h=0.05 no two pixels are grid neighbors
        img = ImageBuffer.solid(5, 3, (12, 200, 77))
        result = segmentation.segment(img, h, mode="rgbxy")

        assert result.n_segments == n_segments
        assert all(c == [12, 200, 77] for c in result.colors.tolist())
        assert np.array_equal(segmentation.render(result, img).pixels, img.pixels)

    def test_large_bandwidth_merges_everything(self, quadrant_image):
        result = segmentation.segment(quadrant_image, 2.0)
        assert result.n_segments == 1

    def test_invalid_bandwidth(self, quadrant_image):
        with pytest.raises(InvalidBandwidthError):
            segmentation.segment(quadrant_image, -0.1)

    def test_sidecar(self, quadrant_image):
        result = segmentation.segment(quadrant_image, 0.1)

        sidecar = result.sidecar(record_timings=False)
        assert sidecar == {
            "h": 0.1, "mode": "rgb", "n_segments": 4, "iterations": result.iterations,
            "converged": True, "runtime_ms": None,
        }
        assert result.sidecar()["runtime_ms"] >= 0



def _two_blocks(width=8, height=6):
    pixels = np.zeros((height, width, 3), dtype=np.uint8)
    pixels[:, :width // 2] = (200, 30, 30)
    pixels[:, width // 2:] = (20, 40, 220)
    return ImageBuffer(pixels)


def test_rgb_and_rgbxy_agree_on_contiguous_blocks():
    img = _two_blocks()
    rgb = segmentation.segment(img, 0.3, mode="rgb")
    rgbxy = segmentation.segment(img, 0.3, mode="rgbxy")

    blocks = np.repeat([[0, 0, 0, 0, 1, 1, 1, 1]], 6, axis=0)
    assert rgb.n_segments == rgbxy.n_segments == 2
    assert np.array_equal(rgb.label_map, rgbxy.label_map)
    assert segmentation.score_segmentation(rgbxy, blocks).ari == pytest.approx(1.0)
    assert np.array_equal(segmentation.render(rgbxy, img).pixels, img.pixels)


def test_rgbxy_splits_blocks_when_pixels_are_spatially_apart():
    img = _two_blocks()
    assert segmentation.segment(img, 0.3, mode="rgb").n_segments == 2
    assert segmentation.segment(img, 0.15, mode="rgbxy").n_segments == 4


def test_render_golden_bytes(tmp_path):
    pixels = np.array([
        [(200, 30, 30), (203, 31, 30), (20, 40, 220), (22, 41, 219)],
        [(199, 29, 33), (201, 30, 32), (21, 39, 221), (20, 41, 223)],
    ], dtype=np.uint8)
    img = ImageBuffer(pixels)
    result = segmentation.segment(img, 0.3)
    rendered = segmentation.render(result, img)

    left, right = bytes([201, 30, 31]), bytes([21, 40, 221])
    row = left + left + right + right
    assert rendered.pixels.tobytes() == row + row

    path = image_io.save_image(rendered, tmp_path / "rendered.ppm")
    assert path.read_bytes() == b"P6\n4 2\n255\n" + row + row


def test_render_shape_mismatch(quadrant_image):
    result = segmentation.segment(quadrant_image, 0.1)
    with pytest.raises(InvalidInputError):
        segmentation.render(result, ImageBuffer.solid(4, 4, (0, 0, 0)))


def test_score_shape_mismatch(quadrant_image):
    result = segmentation.segment(quadrant_image, 0.1)
    with pytest.raises(InvalidInputError):
        segmentation.score_segmentation(result, np.zeros((4, 4), dtype=int))
