"""
Image and label-map codecs.

Decoding and encoding go through Pillow; only PNG and binary PPM (P6) are
accepted as inputs. Label maps are written as binary PGM (P5), 8-bit when all
ids fit in a byte and 16-bit big-endian otherwise, or as CSV.
"""

import logging
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image, ImageDraw, UnidentifiedImageError

from gridshift.errors import ImageDecodeError, InvalidInputError
from gridshift.models.imaging import ImageBuffer

logger = logging.getLogger(__name__)

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
PPM_SIGNATURE = b"P6"
FRAME_SUFFIXES = (".png", ".ppm")

PathLike = Union[str, Path]


def _sniff(path: Path) -> str:
    try:
        with path.open("rb") as fh:
            head = fh.read(8)
    except FileNotFoundError:
        raise ImageDecodeError(f"image not found: {path}") from None
    except OSError as exc:
        raise ImageDecodeError(f"cannot read {path}: {exc}") from None
    if head.startswith(PNG_SIGNATURE):
        return "PNG"
    if head.startswith(PPM_SIGNATURE):
        return "PPM"
    raise ImageDecodeError(f"{path}: unsupported image format (expected PNG or binary PPM)")


def load_image(path: PathLike) -> ImageBuffer:
    """Decode a PNG or P6 PPM file into an 8-bit RGB buffer."""
    path = Path(path)
    fmt = _sniff(path)
    try:
        with Image.open(path, formats=[fmt]) as img:
            img.load()
            rgb = img.convert("RGB")
            pixels = np.array(rgb, dtype=np.uint8)
    except (OSError, UnidentifiedImageError, ValueError, SyntaxError) as exc:
        raise ImageDecodeError(f"{path}: corrupt or truncated {fmt} data ({exc})") from None
    logger.debug("Loaded %s (%dx%d)", path.name, pixels.shape[1], pixels.shape[0])
    return ImageBuffer(pixels)


def save_image(img: ImageBuffer, path: PathLike) -> Path:
    """Write a buffer as PNG or PPM, chosen by file suffix."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fmt = "PPM" if path.suffix.lower() == ".ppm" else "PNG"
    Image.fromarray(img.pixels).save(path, format=fmt)
    return path


def save_label_map(label_map: np.ndarray, path: PathLike) -> Path:
    """Write a label map as PGM or CSV, chosen by file suffix.

    PGM output is 8-bit for at most 255 segments and 16-bit above that.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix.lower() == ".csv":
        np.savetxt(path, label_map, fmt="%d", delimiter=",")
        return path

    top = int(label_map.max()) if label_map.size else 0
    n_segments = np.unique(label_map).shape[0]
    if n_segments <= 255 and top <= 255:
        Image.fromarray(label_map.astype(np.uint8)).save(path, format="PPM")
    elif top <= 65535:
        height, width = label_map.shape
        with path.open("wb") as fh:
            fh.write(f"P5\n{width} {height}\n65535\n".encode("ascii"))
            fh.write(label_map.astype(">u2").tobytes())
    else:
        raise InvalidInputError(f"{top + 1} segments do not fit a 16-bit PGM; write the label map as CSV")
    return path


def load_label_map(path: PathLike) -> np.ndarray:
    """Read a label map from PGM, PNG (grayscale) or CSV as an int64 (height, width) array."""
    path = Path(path)
    if not path.exists():
        raise ImageDecodeError(f"label map not found: {path}")
    if path.suffix.lower() == ".csv":
        try:
            return np.loadtxt(path, delimiter=",", dtype=np.int64, ndmin=2)
        except ValueError as exc:
            raise ImageDecodeError(f"{path}: malformed label map CSV ({exc})") from None
    try:
        with Image.open(path) as img:
            img.load()
            return np.array(img).astype(np.int64)
    except (OSError, UnidentifiedImageError, ValueError, SyntaxError) as exc:
        raise ImageDecodeError(f"{path}: cannot decode label map ({exc})") from None


def list_frames(directory: PathLike) -> list[Path]:
    """PNG/PPM files of a directory sorted lexicographically by name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise InvalidInputError(f"frame directory not found: {directory}")
    frames = sorted(p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in FRAME_SUFFIXES)
    if not frames:
        raise InvalidInputError(f"no PNG or PPM frames in {directory}")
    return frames


def draw_rectangle(img: ImageBuffer, box: tuple[int, int, int, int],
                   color: tuple[int, int, int] = (255, 255, 0)) -> ImageBuffer:
    """Copy of img with a one-pixel rectangle outline; box is (x0, y0, x1, y1) inclusive."""
    canvas = Image.fromarray(img.pixels)
    ImageDraw.Draw(canvas).rectangle(box, outline=color, width=1)
    return ImageBuffer(np.array(canvas, dtype=np.uint8))
