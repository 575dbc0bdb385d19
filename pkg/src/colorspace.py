"""
Colour space conversions for matrix-valued colour morphology

RGB -> modified HCL (hue, chroma, modified luminance lm = 2L - 1) ->
Cartesian bi-cone coordinates (x, y, z) -> 2x2 symmetric matrices, and back.

Every conversion has an array form working on numpy arrays whose last axis
holds the three components; the scalar dataclass functions delegate to the
array forms so single colours and whole images go through identical arithmetic.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.error_recovery import DomainError

SQRT1_2 = 1.0 / np.sqrt(2.0)
TWO_PI = 2.0 * np.pi

# Slack for the bi-cone check on colours that went through floating point
BICONE_TOL = 1e-12


@dataclass(frozen=True)
class RgbColor:
    """Normalised RGB colour, each channel in [0, 1]."""
    r: float
    g: float
    b: float

    def __post_init__(self):
        for name in ("r", "g", "b"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"RGB component {name}={value} outside [0, 1]")

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.g, self.b], dtype=np.float64)


@dataclass(frozen=True)
class HclColor:
    """
    Colour in modified HCL coordinates.

    h is the hue as a fraction of a full turn in [0, 1), c the chroma and lm
    the modified luminance in [-1, 1]. Reference colours derived from matrix
    suprema may leave the bi-cone, so the constraint is checked on demand
    (`is_in_bicone`) rather than on construction.
    """
    h: float
    c: float
    lm: float

    def as_array(self) -> np.ndarray:
        return np.array([self.h, self.c, self.lm], dtype=np.float64)

    def is_in_bicone(self, tol: float = BICONE_TOL) -> bool:
        return (
            0.0 <= self.h < 1.0
            and -tol <= self.c <= 1.0 - abs(self.lm) + tol
            and -1.0 - tol <= self.lm <= 1.0 + tol
        )


@dataclass(frozen=True)
class CartesianColor:
    """Cartesian bi-cone coordinates; z equals the modified luminance."""
    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)


@dataclass(frozen=True)
class SymMatrix2:
    """Symmetric 2x2 matrix [[a, b], [b, c]]."""
    a: float
    b: float
    c: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b) and np.isfinite(self.c)):
            raise DomainError(f"Matrix entries must be finite: ({self.a}, {self.b}, {self.c})")

    def as_array(self) -> np.ndarray:
        """Entries packed as (a, b, c)."""
        return np.array([self.a, self.b, self.c], dtype=np.float64)

    def to_numpy(self) -> np.ndarray:
        """Full 2x2 matrix."""
        return np.array([[self.a, self.b], [self.b, self.c]], dtype=np.float64)

    def __neg__(self) -> "SymMatrix2":
        return SymMatrix2(-self.a, -self.b, -self.c)

    def __add__(self, other: "SymMatrix2") -> "SymMatrix2":
        return SymMatrix2(self.a + other.a, self.b + other.b, self.c + other.c)

    def __sub__(self, other: "SymMatrix2") -> "SymMatrix2":
        return SymMatrix2(self.a - other.a, self.b - other.b, self.c - other.c)

    def shifted(self, t: float) -> "SymMatrix2":
        """self + t*I"""
        return SymMatrix2(self.a + t, self.b, self.c + t)

    @classmethod
    def identity(cls, scale: float = 1.0) -> "SymMatrix2":
        return cls(scale, 0.0, scale)

    @classmethod
    def from_array(cls, values) -> "SymMatrix2":
        a, b, c = (float(v) for v in values)
        return cls(a, b, c)


# ============================================================================
# Array forms (last axis = 3 components)
# ============================================================================

def _split(arr: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    arr = np.asarray(arr, dtype=np.float64)
    if arr.shape[-1] != 3:
        raise DomainError(f"Expected a trailing axis of length 3, got shape {arr.shape}")
    return arr[..., 0], arr[..., 1], arr[..., 2]


def _wrap_unit(h: np.ndarray) -> np.ndarray:
    """mod 1, folding the 1.0 produced by tiny negative inputs back to 0."""
    h = np.mod(h, 1.0)
    return np.where(h >= 1.0, 0.0, h)


def rgb_to_hcl_array(rgb: np.ndarray) -> np.ndarray:
    """
    RGB -> (h, c, lm).

    Hue case list is evaluated in the order R, G, B; on ties in the channel
    maximum the first matching channel wins. Achromatic colours (C = 0) get h = 0.
    """
    r, g, b = _split(rgb)
    big = np.maximum(np.maximum(r, g), b)
    small = np.minimum(np.minimum(r, g), b)
    chroma = big - small
    lm = big + small - 1.0

    chromatic = chroma > 0.0
    six_c = np.where(chromatic, 6.0 * chroma, 1.0)

    h_r = (g - b) / six_c
    h_g = (b - r) / six_c + 1.0 / 3.0
    h_b = (r - g) / six_c + 2.0 / 3.0
    hue = np.where(big == r, h_r, np.where(big == g, h_g, h_b))
    hue = np.where(chromatic, _wrap_unit(hue), 0.0)

    return np.stack((hue, chroma, lm), axis=-1)


def hcl_to_rgb_array(hcl: np.ndarray, check: bool = True) -> np.ndarray:
    """
    (h, c, lm) -> RGB by hue-sector reconstruction.

    With L = (lm + 1)/2 the channel extrema are M = L + C/2 and m = L - C/2;
    the sector k = floor(6h) fixes which channel holds M, which holds m and
    which holds the intermediate value m + C*(1 - |6h mod 2 - 1|).

    Raises:
        DomainError: If check is set and an input leaves the bi-cone
    """
    h, c, lm = _split(hcl)
    if check:
        bad = ~((h >= 0.0) & (h < 1.0) & (c >= -BICONE_TOL) & (c <= 1.0 - np.abs(lm) + BICONE_TOL))
        if np.any(bad):
            first = np.asarray(hcl)[bad][0] if np.ndim(bad) else np.asarray(hcl)
            raise DomainError(f"HCL colour outside the bi-cone: {tuple(np.ravel(first))}")

    lightness = 0.5 * (lm + 1.0)
    small = lightness - 0.5 * c
    h6 = 6.0 * h
    sector = np.floor(h6).astype(np.int64) % 6
    mid = c * (1.0 - np.abs(np.mod(h6, 2.0) - 1.0))

    zero = np.zeros_like(c)
    # (r, g, b) offsets above m for each sector
    table_r = np.choose(sector, [c, mid, zero, zero, mid, c])
    table_g = np.choose(sector, [mid, c, c, mid, zero, zero])
    table_b = np.choose(sector, [zero, zero, mid, c, c, mid])

    rgb = np.stack((table_r + small, table_g + small, table_b + small), axis=-1)
    return np.clip(rgb, 0.0, 1.0)


def hcl_to_cartesian_array(hcl: np.ndarray) -> np.ndarray:
    """x = C cos(2 pi H), y = C sin(2 pi H), z = lm"""
    h, c, lm = _split(hcl)
    angle = TWO_PI * h
    return np.stack((c * np.cos(angle), c * np.sin(angle), lm), axis=-1)


def cartesian_to_hcl_array(xyz: np.ndarray) -> np.ndarray:
    """Inverse polar map; hue is 0 where the chroma vanishes."""
    x, y, z = _split(xyz)
    c = np.hypot(x, y)
    hue = np.where(c > 0.0, _wrap_unit(np.arctan2(y, x) / TWO_PI), 0.0)
    return np.stack((hue, c, z), axis=-1)


def cartesian_to_matrix_array(xyz: np.ndarray) -> np.ndarray:
    """(x, y, z) -> (a, b, c) of (1/sqrt 2) [[z - y, x], [x, z + y]]"""
    x, y, z = _split(xyz)
    return np.stack((SQRT1_2 * (z - y), SQRT1_2 * x, SQRT1_2 * (z + y)), axis=-1)


def matrix_to_cartesian_array(abc: np.ndarray) -> np.ndarray:
    """(a, b, c) -> (1/sqrt 2) (2b, c - a, c + a)"""
    a, b, c = _split(abc)
    return np.stack((SQRT1_2 * (2.0 * b), SQRT1_2 * (c - a), SQRT1_2 * (c + a)), axis=-1)


def rgb_to_matrix_array(rgb: np.ndarray) -> np.ndarray:
    return cartesian_to_matrix_array(hcl_to_cartesian_array(rgb_to_hcl_array(rgb)))


def matrix_to_hcl_array(abc: np.ndarray) -> np.ndarray:
    return cartesian_to_hcl_array(matrix_to_cartesian_array(abc))


# ============================================================================
# Scalar forms
# ============================================================================

def rgb_to_hcl(p: RgbColor) -> HclColor:
    h, c, lm = rgb_to_hcl_array(p.as_array())
    return HclColor(float(h), float(c), float(lm))


def hcl_to_rgb(q: HclColor) -> RgbColor:
    """
    Raises:
        DomainError: If q violates the bi-cone constraint
    """
    r, g, b = hcl_to_rgb_array(q.as_array())
    return RgbColor(float(r), float(g), float(b))


def hcl_to_cartesian(q: HclColor) -> CartesianColor:
    x, y, z = hcl_to_cartesian_array(q.as_array())
    return CartesianColor(float(x), float(y), float(z))


def cartesian_to_hcl(v: CartesianColor) -> HclColor:
    h, c, lm = cartesian_to_hcl_array(v.as_array())
    return HclColor(float(h), float(c), float(lm))


def cartesian_to_matrix(v: CartesianColor) -> SymMatrix2:
    return SymMatrix2.from_array(cartesian_to_matrix_array(v.as_array()))


def matrix_to_cartesian(m: SymMatrix2) -> CartesianColor:
    x, y, z = matrix_to_cartesian_array(m.as_array())
    return CartesianColor(float(x), float(y), float(z))


def rgb_to_matrix(p: RgbColor) -> SymMatrix2:
    return cartesian_to_matrix(hcl_to_cartesian(rgb_to_hcl(p)))


def matrix_to_hcl(m: SymMatrix2) -> HclColor:
    return cartesian_to_hcl(matrix_to_cartesian(m))
