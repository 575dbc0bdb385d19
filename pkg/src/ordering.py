"""
Distance-based total order for colour morphology

Colours in a structuring-element window are ranked by
1. distance to a reference colour (the LES for dilation, the LEI for erosion),
2. modified luminance (larger first for dilation, smaller first for erosion),
3. chroma (same polarity as luminance),
4. hue: angular distance to the reference hue (closer first), then the
   wrap clause (h - h_ref) mod 2 pi <= pi ranks first-side hues lower,
5. scan-line position (smaller first).

The preferred colour is the minimum of this lexicographic key, so the
selected output is always one of the window's own colours.
"""

from dataclasses import dataclass
from typing import NamedTuple, Sequence, Tuple

import numpy as np

from src.colorspace import HclColor, TWO_PI
from src.distance import (
    DistanceKind,
    OneHWeight,
    angular_distance_array,
    delta_e_array,
)
from src.error_recovery import DomainError


class KeyArrays(NamedTuple):
    """Order-key fields as arrays of a common shape."""
    dist: np.ndarray
    lm: np.ndarray
    c: np.ndarray
    hue_dist: np.ndarray
    hue_wrap: np.ndarray


@dataclass(frozen=True)
class OrderKey:
    """Ordering key of one colour relative to a reference colour."""
    dist: float
    lm: float
    c: float
    hue_dist: float
    hue_wrap: bool

    def sort_key(self, dual: bool = False) -> Tuple[float, float, float, float, bool]:
        """Ascending tuple; the first element of a sorted list is the preferred colour."""
        if dual:
            return (self.dist, self.lm, self.c, self.hue_dist, self.hue_wrap)
        return (self.dist, -self.lm, -self.c, self.hue_dist, self.hue_wrap)


def key_precedes(k1: OrderKey, k2: OrderKey, dual: bool = False) -> bool:
    """Strict preference: k1 ranks before k2."""
    return k1.sort_key(dual) < k2.sort_key(dual)


def hue_precedes(h1: float, h2: float, h_ref: float) -> bool:
    """
    H1 < H2 in the hue relation: -(h1 / h_ref) < -(h2 / h_ref), or the angular
    distances tie and (h1 - h_ref) mod 2 pi <= pi. Angles in radians.
    """
    d1 = float(angular_distance_array(np.float64(h1), np.float64(h_ref)))
    d2 = float(angular_distance_array(np.float64(h2), np.float64(h_ref)))
    if -d1 < -d2:
        return True
    return d1 == d2 and float(np.mod(h1 - h_ref, TWO_PI)) <= np.pi


def order_keys_array(
    hcl: np.ndarray,
    ref: np.ndarray,
    kind: DistanceKind,
    weight: OneHWeight = OneHWeight.DIFF
) -> KeyArrays:
    """
    Key fields for HCL colours against references (broadcasting on leading axes).
    """
    hcl = np.asarray(hcl, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    dist = delta_e_array(hcl, ref, kind, weight)
    h = TWO_PI * hcl[..., 0]
    h_ref = TWO_PI * ref[..., 0]
    hue_dist = angular_distance_array(h, h_ref)
    hue_wrap = np.mod(h - h_ref, TWO_PI) <= np.pi
    shape = dist.shape
    return KeyArrays(
        dist=dist,
        lm=np.broadcast_to(hcl[..., 2], shape),
        c=np.broadcast_to(hcl[..., 1], shape),
        hue_dist=np.broadcast_to(hue_dist, shape),
        hue_wrap=np.broadcast_to(hue_wrap, shape),
    )


def select_index_array(
    keys: KeyArrays,
    valid: np.ndarray,
    position: np.ndarray,
    dual: bool = False
) -> np.ndarray:
    """
    Index (along the last axis) of the preferred colour of each window.

    Args:
        keys: Key fields, shape (..., n)
        valid: Which window entries exist, shape (..., n)
        position: Scan-line index of each entry, shape (..., n)
        dual: Erosion polarity (smaller luminance and chroma preferred)
    """
    sign = 1.0 if dual else -1.0
    invalid = (~valid).astype(np.int8)
    # zero out absent entries so no NaN/inf reaches the sort
    dist = np.where(valid, keys.dist, 0.0)
    lm = np.where(valid, sign * keys.lm, 0.0)
    c = np.where(valid, sign * keys.c, 0.0)
    hue_dist = np.where(valid, keys.hue_dist, 0.0)
    hue_wrap = np.where(valid, keys.hue_wrap, False).astype(np.int8)
    order = np.lexsort((position, hue_wrap, hue_dist, c, lm, dist, invalid), axis=-1)
    return order[..., 0]


def make_order_key(
    f: HclColor,
    ref: HclColor,
    kind: DistanceKind,
    weight: OneHWeight = OneHWeight.DIFF
) -> OrderKey:
    keys = order_keys_array(f.as_array(), ref.as_array(), kind, weight)
    return OrderKey(
        dist=float(keys.dist),
        lm=float(keys.lm),
        c=float(keys.c),
        hue_dist=float(keys.hue_dist),
        hue_wrap=bool(keys.hue_wrap),
    )


def _select(
    colours: Sequence[HclColor],
    ref: HclColor,
    kind: DistanceKind,
    weight: OneHWeight,
    dual: bool
) -> int:
    if len(colours) == 0:
        raise DomainError("Cannot select from an empty colour list")
    hcl = np.array([col.as_array() for col in colours], dtype=np.float64)
    keys = order_keys_array(hcl, ref.as_array(), kind, weight)
    n = hcl.shape[0]
    return int(select_index_array(keys, np.ones(n, dtype=bool), np.arange(n), dual=dual))


def select_supremum(
    colours: Sequence[HclColor],
    ref: HclColor,
    kind: DistanceKind,
    weight: OneHWeight = OneHWeight.DIFF
) -> int:
    """
    Index of the colour closest to the supremum reference; ties prefer larger
    luminance, larger chroma, the hue closest to the reference, then the
    earliest position.

    Raises:
        DomainError: If colours is empty
    """
    return _select(colours, ref, kind, weight, dual=False)


def select_infimum(
    colours: Sequence[HclColor],
    ref_inf: HclColor,
    kind: DistanceKind,
    weight: OneHWeight = OneHWeight.DIFF
) -> int:
    """
    Dual of select_supremum: closest to the infimum reference, ties prefer
    smaller luminance and chroma; the hue rule is unchanged.

    Raises:
        DomainError: If colours is empty
    """
    return _select(colours, ref_inf, kind, weight, dual=True)
