"""
Image and report I/O, test-image generation

- 8-bit RGB PNG load/save (bytes b <-> b/255, round half up on save)
- CSV/JSON writers with retry and exponential backoff
- Seeded random images (numpy PCG64 generator, uniform over the 256 byte levels)
- Synthetic stand-ins for natural test images: grid and two-colour images
"""

import csv
import json
import logging
import time
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from src.error_recovery import DomainError, ImageIOError
from src.morphology import ColorImage

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# 8-bit modes Pillow can turn into RGB without losing precision
_EIGHT_BIT_MODES = {"RGB", "RGBA", "L", "LA", "P", "PA"}


def load_png(path: PathLike) -> ColorImage:
    """
    Load an 8-bit image as a ColorImage with components b/255.

    Raises:
        ImageIOError: If the file is missing, unreadable or not 8 bits per channel
    """
    path = Path(path)
    if not path.exists():
        raise ImageIOError(f"Input image not found: {path}")

    try:
        with Image.open(path) as img:
            img.load()
            mode = img.mode
            if mode not in _EIGHT_BIT_MODES:
                raise ImageIOError(f"Unsupported bit depth/mode '{mode}' in {path.name}; expected 8-bit RGB")
            if mode in ("RGBA", "LA", "PA") or (mode == "P" and "transparency" in img.info):
                logger.warning(f"⚠ Ignoring alpha channel of {path.name}")
            data = np.array(img.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError) as e:
        if isinstance(e, ImageIOError):
            raise
        raise ImageIOError(f"Failed to read image {path}: {e}") from e

    logger.info(f"✓ Loaded {path.name} ({data.shape[1]}x{data.shape[0]})")
    return ColorImage.from_bytes(data)


def save_png(image: ColorImage, path: PathLike, max_retries: int = 3) -> Path:
    """
    Save as 8-bit RGB PNG (v -> round(v*255) half up, clamped).

    Raises:
        ImageIOError: If the file cannot be written after retries
    """
    path = Path(path)
    data = image.to_bytes()

    def write():
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(data).save(path, format="PNG", optimize=True)

    if not save_with_retry(write, max_retries=max_retries, operation=f"PNG save {path.name}"):
        raise ImageIOError(f"Failed to write image {path}")
    logger.debug(f"✓ Saved PNG: {path.name}")
    return path


def random_images(seed: int, count: int, size: int) -> List[ColorImage]:
    """
    `count` images of size x size pixels, every channel drawn i.i.d. uniform
    from the byte levels 0..255 by numpy's PCG64 generator seeded with `seed`.
    """
    if count < 1 or size < 1:
        raise DomainError(f"random_images needs count >= 1 and size >= 1 (got {count}, {size})")
    rng = np.random.default_rng(seed)
    images = [
        ColorImage.from_bytes(rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8))
        for _ in range(count)
    ]
    logger.debug(f"Generated {count} random {size}x{size} images (seed={seed})")
    return images


def random_binary_images(seed: int, count: int, size: int) -> List[ColorImage]:
    """Black/white images, each pixel white with probability 1/2."""
    rng = np.random.default_rng(seed)
    return [
        ColorImage(np.repeat(rng.integers(0, 2, size=(size, size, 1)).astype(np.float64), 3, axis=2))
        for _ in range(count)
    ]


def grid_image(
    size: int = 128,
    line_width: int = 3,
    spacing: int = 16,
    background: Tuple[float, float, float] = (1.0, 1.0, 1.0),
    line_colour: Tuple[float, float, float] = (0.0, 0.0, 0.0)
) -> ColorImage:
    """
    Background with a grid of lines `line_width` pixels wide, one line every
    `spacing` pixels in both directions (thin dark frames for closing tests).
    """
    if line_width < 1 or spacing <= line_width:
        raise DomainError("grid_image needs 1 <= line_width < spacing")
    pixels = np.empty((size, size, 3), dtype=np.float64)
    pixels[...] = background
    offset = spacing // 2
    on_line = ((np.arange(size) - offset) % spacing) < line_width
    pixels[on_line, :, :] = line_colour
    pixels[:, on_line, :] = line_colour
    return ColorImage(pixels)


def two_colour_image(
    size: int,
    left: Tuple[float, float, float],
    right: Tuple[float, float, float]
) -> ColorImage:
    """Left half one colour, right half another."""
    pixels = np.empty((size, size, 3), dtype=np.float64)
    pixels[:, : size // 2] = left
    pixels[:, size // 2:] = right
    return ColorImage(pixels)


# ============================================================================
# Writers
# ============================================================================

def format_number(value: float) -> str:
    """CSV number format: 9 significant digits, dot decimal."""
    return f"{value:.9g}"


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence], max_retries: int = 3) -> Path:
    """
    Write a UTF-8, comma-separated CSV; floats use `format_number`.

    Raises:
        ImageIOError: If the file cannot be written after retries
    """
    path = Path(path)
    lines = [list(header)]
    for row in rows:
        lines.append([format_number(v) if isinstance(v, (float, np.floating)) else v for v in row])

    def write():
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            csv.writer(f).writerows(lines)

    if not save_with_retry(write, max_retries=max_retries, operation=f"CSV write {path.name}"):
        raise ImageIOError(f"Failed to write CSV {path}")
    logger.info(f"✓ Saved CSV: {path.name} ({len(lines) - 1} rows)")
    return path


def write_json(path: PathLike, data: Dict[str, Any], max_retries: int = 3) -> Path:
    path = Path(path)

    def write():
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2)

    if not save_with_retry(write, max_retries=max_retries, operation=f"JSON write {path.name}"):
        raise ImageIOError(f"Failed to write JSON {path}")
    logger.info(f"✓ Saved JSON: {path.name}")
    return path


def save_with_retry(
    save_func: Callable[[], None],
    max_retries: int = 3,
    operation: str = "save",
    base_delay: float = 1.0
) -> bool:
    """
    Run a write with retries and exponential backoff (base_delay * 2**attempt).

    Returns:
        True if an attempt succeeded, False once all attempts failed
    """
    for attempt in range(max_retries):
        try:
            save_func()
            return True
        except (OSError, ValueError) as e:
            logger.warning(f"⚠ {operation} failed (attempt {attempt + 1}/{max_retries}): {e}")
            if attempt < max_retries - 1:
                wait_time = base_delay * 2 ** attempt
                logger.info(f"Retrying in {wait_time:g}s...")
                time.sleep(wait_time)
    logger.error(f"✗ {operation} failed after {max_retries} attempts")
    return False
