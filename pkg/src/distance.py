"""
Colour distances for the distance-based ordering

- angular hue distance on [0, 2 pi)
- modified HyAB (city-block of chroma-plane Euclidean distance and luminance)
- 1H (L1 with chroma-weighted hue term)
- polar (L2 in cylindrical coordinates)
- RGB L2, used by the white-reference baseline
"""

from enum import Enum

import numpy as np

from src.colorspace import (
    CartesianColor,
    HclColor,
    TWO_PI,
    hcl_to_cartesian_array,
)


class DistanceKind(Enum):
    """Colour distance used as the primary ordering key."""
    MHYAB = "mhyab"
    ONE_H = "1h"
    POLAR = "polar"


class OneHWeight(Enum):
    """
    Weight of the hue term in the 1H distance.

    DIFF is |C1 - C2|/2 as in the printed formula, AVG is (C1 + C2)/2,
    i.e. scaling with the average chroma.
    """
    DIFF = "diff"
    AVG = "avg"


def angular_distance_array(h1: np.ndarray, h2: np.ndarray) -> np.ndarray:
    """Shortest arc between angles in radians; result in [0, pi]."""
    diff = np.abs(h1 - h2)
    return np.where(diff <= np.pi, diff, TWO_PI - diff)


def delta_e_mhyab_array(xyz1: np.ndarray, xyz2: np.ndarray) -> np.ndarray:
    return (
        np.hypot(xyz1[..., 0] - xyz2[..., 0], xyz1[..., 1] - xyz2[..., 1])
        + np.abs(xyz1[..., 2] - xyz2[..., 2])
    )


def delta_e_1h_array(hcl1: np.ndarray, hcl2: np.ndarray, weight: OneHWeight = OneHWeight.DIFF) -> np.ndarray:
    c1, c2 = hcl1[..., 1], hcl2[..., 1]
    d_c = np.abs(c1 - c2)
    hue_weight = 0.5 * d_c if weight is OneHWeight.DIFF else 0.5 * (c1 + c2)
    hue = angular_distance_array(TWO_PI * hcl1[..., 0], TWO_PI * hcl2[..., 0])
    return np.abs(hcl1[..., 2] - hcl2[..., 2]) + d_c + hue_weight * hue


def delta_e_polar_array(hcl1: np.ndarray, hcl2: np.ndarray) -> np.ndarray:
    c1, c2 = hcl1[..., 1], hcl2[..., 1]
    hue = angular_distance_array(TWO_PI * hcl1[..., 0], TWO_PI * hcl2[..., 0])
    d_lm = hcl1[..., 2] - hcl2[..., 2]
    d_c = c1 - c2
    # every term is symmetric in its arguments and non-negative
    return np.sqrt(d_lm * d_lm + d_c * d_c + 2.0 * c1 * c2 * (1.0 - np.cos(hue)))


def rgb_l2_distance_array(rgb1: np.ndarray, rgb2: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum((rgb1 - rgb2) ** 2, axis=-1))


def delta_e_array(
    hcl1: np.ndarray,
    hcl2: np.ndarray,
    kind: DistanceKind,
    weight: OneHWeight = OneHWeight.DIFF
) -> np.ndarray:
    """Distance of the selected kind between HCL arrays (broadcasting)."""
    if kind is DistanceKind.MHYAB:
        return delta_e_mhyab_array(hcl_to_cartesian_array(hcl1), hcl_to_cartesian_array(hcl2))
    if kind is DistanceKind.ONE_H:
        return delta_e_1h_array(hcl1, hcl2, weight)
    return delta_e_polar_array(hcl1, hcl2)


# Scalar forms

def angular_distance(h1: float, h2: float) -> float:
    return float(angular_distance_array(np.float64(h1), np.float64(h2)))


def delta_e_mhyab(f1: CartesianColor, f2: CartesianColor) -> float:
    return float(delta_e_mhyab_array(f1.as_array(), f2.as_array()))


def delta_e_1h(f1: HclColor, f2: HclColor, weight: OneHWeight = OneHWeight.DIFF) -> float:
    return float(delta_e_1h_array(f1.as_array(), f2.as_array(), weight))


def delta_e_polar(f1: HclColor, f2: HclColor) -> float:
    return float(delta_e_polar_array(f1.as_array(), f2.as_array()))
