"""
Image-level morphology operators

- Grayscale (optionally non-flat) dilation/erosion and the negative image
- DLES colour dilation/erosion/opening/closing: per window, the LES (or LEI)
  of the window's colour matrices is the reference colour and the window
  colour nearest to it under the total order of `src.ordering` is copied out
- Channel-wise RGB baselines and the white/black reference baselines

Windows are clipped to the image domain. Colour operators work on row bands
of the image so memory stays bounded; bands can be spread over worker threads
and are reassembled in band order, so the result does not depend on the
worker count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import cv2
import numpy as np

from src.colorspace import (
    RgbColor,
    TWO_PI,
    cartesian_to_matrix_array,
    hcl_to_cartesian_array,
    matrix_to_hcl_array,
    rgb_to_hcl_array,
)
from src.distance import DistanceKind, OneHWeight, angular_distance_array, rgb_l2_distance_array
from src.error_recovery import DomainError, UnsupportedFeatureError
from src.ordering import KeyArrays, order_keys_array, select_index_array
from src.spectral import eigendecompose_array, les_arrays

logger = logging.getLogger(__name__)

# Upper bound on pixels x window entries handled per band
BAND_ENTRIES = 1 << 16


@dataclass(eq=False)
class ColorImage:
    """Row-major RGB image, pixels of shape (height, width, 3) in [0, 1]."""
    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise DomainError(f"ColorImage needs shape (h, w, 3), got {self.pixels.shape}")
        if self.pixels.shape[0] < 1 or self.pixels.shape[1] < 1:
            raise DomainError("ColorImage must not be empty")
        if np.any(~np.isfinite(self.pixels)) or self.pixels.min() < 0.0 or self.pixels.max() > 1.0:
            raise DomainError("ColorImage components must lie in [0, 1]")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def pixel(self, x: int, y: int) -> RgbColor:
        r, g, b = self.pixels[y, x]
        return RgbColor(float(r), float(g), float(b))

    def to_bytes(self) -> np.ndarray:
        """Quantise to uint8: round half up, clamped."""
        return np.clip(np.floor(self.pixels * 255.0 + 0.5), 0, 255).astype(np.uint8)

    @classmethod
    def from_bytes(cls, data: np.ndarray) -> "ColorImage":
        return cls(np.asarray(data, dtype=np.float64) / 255.0)

    @classmethod
    def constant(cls, width: int, height: int, rgb: Tuple[float, float, float]) -> "ColorImage":
        return cls(np.broadcast_to(np.asarray(rgb, dtype=np.float64), (height, width, 3)).copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ColorImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __repr__(self) -> str:
        return f"ColorImage(width={self.width}, height={self.height})"


@dataclass(eq=False)
class GrayImage:
    """Grayscale image, pixels of shape (height, width) in [0, 255]."""
    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.pixels.ndim != 2 or self.pixels.size == 0:
            raise DomainError(f"GrayImage needs a non-empty 2-D array, got {self.pixels.shape}")
        if np.any(~np.isfinite(self.pixels)) or self.pixels.min() < 0.0 or self.pixels.max() > 255.0:
            raise DomainError("GrayImage values must lie in [0, 255]")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __repr__(self) -> str:
        return f"GrayImage(width={self.width}, height={self.height})"


@dataclass(frozen=True)
class StructuringElement:
    """
    Origin-centred set of (dx, dy) offsets; optional additive gray offsets
    (one per member) make it non-flat for the grayscale operators.
    """
    offsets: Tuple[Tuple[int, int], ...]
    gray_offsets: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        offsets = tuple((int(dx), int(dy)) for dx, dy in self.offsets)
        if not offsets:
            raise DomainError("Structuring element must not be empty")
        if len(set(offsets)) != len(offsets):
            raise DomainError("Structuring element offsets must be unique")
        object.__setattr__(self, "offsets", offsets)
        if self.gray_offsets is not None:
            gray = tuple(float(eta) for eta in self.gray_offsets)
            if len(gray) != len(offsets):
                raise DomainError("gray_offsets needs one value per offset")
            object.__setattr__(self, "gray_offsets", gray)

    @property
    def is_flat(self) -> bool:
        return self.gray_offsets is None or all(eta == 0.0 for eta in self.gray_offsets)

    @property
    def radius(self) -> int:
        return max(max(abs(dx), abs(dy)) for dx, dy in self.offsets)

    @property
    def etas(self) -> Tuple[float, ...]:
        return self.gray_offsets if self.gray_offsets is not None else (0.0,) * len(self.offsets)

    def __len__(self) -> int:
        return len(self.offsets)


def make_square_se(k: int) -> StructuringElement:
    """
    Flat k x k square centred at the origin.

    Raises:
        DomainError: If k is not a positive odd integer
    """
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool) or k < 1 or k % 2 == 0:
        raise DomainError(f"Square SE size must be a positive odd integer, got {k!r}")
    half = k // 2
    return StructuringElement(
        tuple((dx, dy) for dy in range(-half, half + 1) for dx in range(-half, half + 1))
    )


def make_se_from_mask(mask: np.ndarray, gray_offsets: Optional[np.ndarray] = None) -> StructuringElement:
    """
    Structuring element from a binary mask with odd side lengths, origin at the centre.

    Args:
        mask: 2-D boolean array
        gray_offsets: Optional array of the same shape with eta values
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2 or mask.shape[0] % 2 == 0 or mask.shape[1] % 2 == 0:
        raise DomainError(f"SE mask needs odd side lengths, got {mask.shape}")
    cy, cx = mask.shape[0] // 2, mask.shape[1] // 2
    ys, xs = np.nonzero(mask)
    offsets = tuple((int(x - cx), int(y - cy)) for y, x in zip(ys, xs))
    etas = None
    if gray_offsets is not None:
        etas = tuple(float(v) for v in np.asarray(gray_offsets, dtype=np.float64)[ys, xs])
    return StructuringElement(offsets, etas)


def _require_flat(se: StructuringElement) -> None:
    if not se.is_flat:
        raise UnsupportedFeatureError("Colour morphology is defined for flat structuring elements only")


# ============================================================================
# Grayscale baseline
# ============================================================================

def _shifted(padded: np.ndarray, r: int, sx: int, sy: int, height: int, width: int) -> np.ndarray:
    """View of padded[y + r + sy, x + r + sx] for all image pixels (x, y)."""
    return padded[r + sy:r + sy + height, r + sx:r + sx + width]


def gray_dilate(f: GrayImage, g: StructuringElement) -> GrayImage:
    """
    out(x) = max over u in G with x - u in the image of f(x - u) + eta(u).

    Pixels whose clipped window is empty keep their value; results are
    clipped to [0, 255].
    """
    r = g.radius
    padded = np.pad(f.pixels, r, mode="constant", constant_values=-np.inf)
    out = np.full_like(f.pixels, -np.inf)
    for (dx, dy), eta in zip(g.offsets, g.etas):
        np.maximum(out, _shifted(padded, r, -dx, -dy, f.height, f.width) + eta, out=out)
    out = np.where(np.isfinite(out), out, f.pixels)
    return GrayImage(np.clip(out, 0.0, 255.0))


def gray_erode(f: GrayImage, g: StructuringElement) -> GrayImage:
    """
    out(x) = min over u in G with x + u in the image of f(x + u) - eta(u).
    """
    r = g.radius
    padded = np.pad(f.pixels, r, mode="constant", constant_values=np.inf)
    out = np.full_like(f.pixels, np.inf)
    for (dx, dy), eta in zip(g.offsets, g.etas):
        np.minimum(out, _shifted(padded, r, dx, dy, f.height, f.width) - eta, out=out)
    out = np.where(np.isfinite(out), out, f.pixels)
    return GrayImage(np.clip(out, 0.0, 255.0))


def gray_close(f: GrayImage, g: StructuringElement) -> GrayImage:
    return gray_erode(gray_dilate(f, g), g)


def gray_open(f: GrayImage, g: StructuringElement) -> GrayImage:
    return gray_dilate(gray_erode(f, g), g)


Image = Union[GrayImage, ColorImage]


def negate_image(f: Image, value_range: Optional[Tuple[float, float]] = None) -> Image:
    """
    Negative image f_max - f + f_min.

    Args:
        f: Grayscale or colour image; colour images use per-channel extrema
        value_range: (f_min, f_max) to use instead of the image's own extrema
            (grayscale only); pass the original image's range when negating
            twice so the two negations cancel
    """
    if isinstance(f, GrayImage):
        lo, hi = value_range if value_range is not None else (f.pixels.min(), f.pixels.max())
        return GrayImage(hi - f.pixels + lo)
    lo = f.pixels.min(axis=(0, 1))
    hi = f.pixels.max(axis=(0, 1))
    return ColorImage(np.clip(hi - f.pixels + lo, 0.0, 1.0))


# ============================================================================
# Window engine for selection-based colour operators
# ============================================================================

# Per-pixel feature planes gathered into windows
_RGB = slice(0, 3)
_HCL = slice(3, 6)
_LAM, _MU, _PHI = 6, 7, 8

KeyFunction = Callable[[np.ndarray, np.ndarray], KeyArrays]


def _feature_planes(f: ColorImage, negate_matrices: bool) -> np.ndarray:
    """(h, w, 9): rgb, hcl and the spectral data of X (or of -X for erosion)."""
    hcl = rgb_to_hcl_array(f.pixels)
    mats = cartesian_to_matrix_array(hcl_to_cartesian_array(hcl))
    if negate_matrices:
        mats = -mats
    lam, mu, phi = eigendecompose_array(mats[..., 0], mats[..., 1], mats[..., 2])
    return np.concatenate((f.pixels, hcl, np.stack((lam, mu, phi), axis=-1)), axis=-1)


def _select_in_windows(
    f: ColorImage,
    se: StructuringElement,
    key_function: KeyFunction,
    dual: bool,
    needs_spectral: bool,
    workers: int = 1
) -> ColorImage:
    """
    Copy, for every pixel, the window colour with the smallest order key.

    Dilation windows collect f(x - u), erosion windows f(x + u). A window
    left empty by clipping (an SE without the origin near the border) keeps
    the pixel's own colour, as the grayscale operators do.
    """
    _require_flat(se)
    height, width = f.height, f.width
    r = se.radius
    sign = 1 if dual else -1
    shifts = [(sign * dx, sign * dy) for dx, dy in se.offsets]
    k = len(shifts)

    features = _feature_planes(f, negate_matrices=dual) if needs_spectral else np.concatenate(
        (f.pixels, rgb_to_hcl_array(f.pixels)), axis=-1
    )
    padded = np.pad(features, ((r, r), (r, r), (0, 0)), mode="edge")
    position = np.pad(
        np.arange(height * width, dtype=np.int64).reshape(height, width), r,
        mode="constant", constant_values=-1
    )

    band_rows = max(1, BAND_ENTRIES // (width * k))
    bands = [(y0, min(y0 + band_rows, height)) for y0 in range(0, height, band_rows)]

    def run_band(band: Tuple[int, int]) -> np.ndarray:
        y0, y1 = band
        rows = y1 - y0
        win = np.stack(
            [padded[y0 + r + sy:y1 + r + sy, r + sx:r + sx + width] for sx, sy in shifts], axis=2
        )
        pos = np.stack(
            [position[y0 + r + sy:y1 + r + sy, r + sx:r + sx + width] for sx, sy in shifts], axis=2
        )
        valid = pos >= 0
        empty = ~valid.any(axis=-1)
        # edge padding keeps features finite, so empty windows are keyed in full and discarded
        valid = valid | empty[..., None]
        keys = key_function(win, valid)
        best = select_index_array(keys, valid, pos, dual=dual)
        chosen = np.take_along_axis(pos, best[..., None], axis=-1)[..., 0]
        own = np.arange(y0 * width, y1 * width, dtype=np.int64).reshape(rows, width)
        return np.where(empty, own, chosen)

    if workers > 1 and len(bands) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chosen_bands = list(pool.map(run_band, bands))
    else:
        chosen_bands = [run_band(band) for band in bands]

    chosen = np.concatenate(chosen_bands, axis=0)
    out = f.pixels.reshape(-1, 3)[chosen.ravel()].reshape(height, width, 3)
    logger.debug(f"Window selection done: {width}x{height}, |SE|={k}, bands={len(bands)}, dual={dual}")
    return ColorImage(out)


def _dles_key_function(kind: DistanceKind, weight: OneHWeight, dual: bool) -> KeyFunction:
    def keys(win: np.ndarray, valid: np.ndarray) -> KeyArrays:
        a, b, c = les_arrays(win[..., _LAM], win[..., _MU], win[..., _PHI], valid)
        ref_matrix = np.stack((a, b, c), axis=-1)
        if dual:
            ref_matrix = -ref_matrix
        ref = matrix_to_hcl_array(ref_matrix)
        return order_keys_array(win[..., _HCL], ref[..., None, :], kind, weight)
    return keys


def _reference_key_function(reference_rgb: Tuple[float, float, float]) -> KeyFunction:
    ref_rgb = np.asarray(reference_rgb, dtype=np.float64)
    ref_h = TWO_PI * rgb_to_hcl_array(ref_rgb)[0]

    def keys(win: np.ndarray, valid: np.ndarray) -> KeyArrays:
        hcl = win[..., _HCL]
        h = TWO_PI * hcl[..., 0]
        return KeyArrays(
            dist=rgb_l2_distance_array(win[..., _RGB], ref_rgb),
            lm=hcl[..., 2],
            c=hcl[..., 1],
            hue_dist=angular_distance_array(h, ref_h),
            hue_wrap=np.mod(h - ref_h, TWO_PI) <= np.pi,
        )
    return keys


def dles_dilate(
    f: ColorImage,
    se: StructuringElement,
    kind: DistanceKind,
    one_h_weight: OneHWeight = OneHWeight.DIFF,
    workers: int = 1
) -> ColorImage:
    """
    DLES dilation: per window, copy the colour nearest to the window's LES.

    Raises:
        UnsupportedFeatureError: If se is not flat
    """
    return _select_in_windows(
        f, se, _dles_key_function(kind, one_h_weight, dual=False),
        dual=False, needs_spectral=True, workers=workers
    )


def dles_erode(
    f: ColorImage,
    se: StructuringElement,
    kind: DistanceKind,
    one_h_weight: OneHWeight = OneHWeight.DIFF,
    workers: int = 1
) -> ColorImage:
    """
    DLES erosion: per window, copy the colour nearest to the window's LEI.

    Raises:
        UnsupportedFeatureError: If se is not flat
    """
    return _select_in_windows(
        f, se, _dles_key_function(kind, one_h_weight, dual=True),
        dual=True, needs_spectral=True, workers=workers
    )


def dles_close(f: ColorImage, se: StructuringElement, kind: DistanceKind,
               one_h_weight: OneHWeight = OneHWeight.DIFF, workers: int = 1) -> ColorImage:
    return dles_erode(dles_dilate(f, se, kind, one_h_weight, workers), se, kind, one_h_weight, workers)


def dles_open(f: ColorImage, se: StructuringElement, kind: DistanceKind,
              one_h_weight: OneHWeight = OneHWeight.DIFF, workers: int = 1) -> ColorImage:
    return dles_dilate(dles_erode(f, se, kind, one_h_weight, workers), se, kind, one_h_weight, workers)


# ============================================================================
# RGB baselines
# ============================================================================

def _cv_kernel(se: StructuringElement, reflect: bool) -> np.ndarray:
    r = se.radius
    kernel = np.zeros((2 * r + 1, 2 * r + 1), dtype=np.uint8)
    sign = -1 if reflect else 1
    for dx, dy in se.offsets:
        kernel[r + sign * dy, r + sign * dx] = 1
    return kernel


def _keep_unreached(f: ColorImage, out: np.ndarray, kernel: np.ndarray, anchor: Tuple[int, int]) -> ColorImage:
    """Pixels whose clipped window is empty keep their own colour."""
    reached = cv2.dilate(
        np.ones((f.height, f.width), dtype=np.uint8), kernel, anchor=anchor,
        borderType=cv2.BORDER_CONSTANT, borderValue=0
    )
    out = out.reshape(f.pixels.shape)
    return ColorImage(np.where(reached[..., None] > 0, out, f.pixels))


def channelwise_dilate(f: ColorImage, se: StructuringElement) -> ColorImage:
    """
    Independent per-channel sliding maximum; may create false colours.
    """
    _require_flat(se)
    r = se.radius
    kernel = _cv_kernel(se, reflect=True)
    out = cv2.dilate(np.ascontiguousarray(f.pixels), kernel, anchor=(r, r))
    return _keep_unreached(f, out, kernel, (r, r))


def channelwise_erode(f: ColorImage, se: StructuringElement) -> ColorImage:
    """Independent per-channel sliding minimum."""
    _require_flat(se)
    r = se.radius
    kernel = _cv_kernel(se, reflect=False)
    out = cv2.erode(np.ascontiguousarray(f.pixels), kernel, anchor=(r, r))
    return _keep_unreached(f, out, kernel, (r, r))


def white_reference_dilate(f: ColorImage, se: StructuringElement, workers: int = 1) -> ColorImage:
    """
    Copy the window colour with the smallest RGB L2 distance to white; ties
    prefer larger luminance, larger chroma, the hue closest to white's, then
    the earliest position.
    """
    return _select_in_windows(
        f, se, _reference_key_function((1.0, 1.0, 1.0)),
        dual=False, needs_spectral=False, workers=workers
    )


def black_reference_erode(f: ColorImage, se: StructuringElement, workers: int = 1) -> ColorImage:
    """Dual of white_reference_dilate with black as the reference."""
    return _select_in_windows(
        f, se, _reference_key_function((0.0, 0.0, 0.0)),
        dual=True, needs_spectral=False, workers=workers
    )


# ============================================================================
# Method registry
# ============================================================================

Operator = Callable[..., ColorImage]


def _dles_pair(kind: DistanceKind) -> Tuple[Operator, Operator]:
    def dilate(f, se, one_h_weight=OneHWeight.DIFF, workers=1):
        return dles_dilate(f, se, kind, one_h_weight, workers)

    def erode(f, se, one_h_weight=OneHWeight.DIFF, workers=1):
        return dles_erode(f, se, kind, one_h_weight, workers)
    return dilate, erode


def _channelwise_pair() -> Tuple[Operator, Operator]:
    # cv2 runs its own threads
    def dilate(f, se, one_h_weight=OneHWeight.DIFF, workers=1):
        return channelwise_dilate(f, se)

    def erode(f, se, one_h_weight=OneHWeight.DIFF, workers=1):
        return channelwise_erode(f, se)
    return dilate, erode


def _reference_pair() -> Tuple[Operator, Operator]:
    def dilate(f, se, one_h_weight=OneHWeight.DIFF, workers=1):
        return white_reference_dilate(f, se, workers=workers)

    def erode(f, se, one_h_weight=OneHWeight.DIFF, workers=1):
        return black_reference_erode(f, se, workers=workers)
    return dilate, erode


METHODS: Dict[str, Tuple[Operator, Operator]] = {
    "dles-mhyab": _dles_pair(DistanceKind.MHYAB),
    "dles-polar": _dles_pair(DistanceKind.POLAR),
    "dles-1h": _dles_pair(DistanceKind.ONE_H),
    "channelwise": _channelwise_pair(),
    "white-ref": _reference_pair(),
}

OPERATIONS: Sequence[str] = ("dilate", "erode", "open", "close")

def apply_operation(
    operation: str,
    f: ColorImage,
    se: StructuringElement,
    method: str,
    one_h_weight: OneHWeight = OneHWeight.DIFF,
    workers: int = 1
) -> ColorImage:
    """
    Run dilate/erode/open/close with a named method.

    Raises:
        DomainError: On an unknown operation or method
    """
    if method not in METHODS:
        raise DomainError(f"Unknown method '{method}'. Available methods: {list(METHODS)}")
    dilate, erode = METHODS[method]
    opts = {"one_h_weight": one_h_weight, "workers": workers}
    if operation == "dilate":
        return dilate(f, se, **opts)
    if operation == "erode":
        return erode(f, se, **opts)
    if operation == "close":
        return erode(dilate(f, se, **opts), se, **opts)
    if operation == "open":
        return dilate(erode(f, se, **opts), se, **opts)
    raise DomainError(f"Unknown operation '{operation}'. Available operations: {list(OPERATIONS)}")
