"""
Tests for colour space conversions
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.colorspace import (
    SQRT1_2,
    CartesianColor,
    HclColor,
    RgbColor,
    SymMatrix2,
    cartesian_to_hcl,
    cartesian_to_hcl_array,
    cartesian_to_matrix,
    cartesian_to_matrix_array,
    hcl_to_cartesian,
    hcl_to_cartesian_array,
    hcl_to_rgb,
    hcl_to_rgb_array,
    matrix_to_cartesian,
    matrix_to_cartesian_array,
    matrix_to_hcl,
    rgb_to_hcl,
    rgb_to_hcl_array,
    rgb_to_matrix,
)
from src.error_recovery import DomainError


def _hcl(colour: HclColor):
    return (colour.h, colour.c, colour.lm)


@pytest.mark.parametrize("rgb, expected", [
    ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)),
    ((1.0, 1.0, 1.0), (0.0, 0.0, 1.0)),
    ((0.0, 0.0, 0.0), (0.0, 0.0, -1.0)),
    ((0.0, 1.0, 0.0), (1.0 / 3.0, 1.0, 0.0)),
    ((0.0, 0.0, 1.0), (2.0 / 3.0, 1.0, 0.0)),
])
def test_rgb_to_hcl_examples(rgb, expected):
    assert _hcl(rgb_to_hcl(RgbColor(*rgb))) == pytest.approx(expected, abs=1e-15)


def test_rgb_to_hcl_ties_use_first_channel():
    # R = G > B: the R case applies, h = (G - B) / 6C = 1/6
    h, c, lm = _hcl(rgb_to_hcl(RgbColor(1.0, 1.0, 0.0)))
    assert h == pytest.approx(1.0 / 6.0)
    assert c == 1.0


def test_hue_branch_matches_case_formula():
    rng = np.random.default_rng(7)
    rgb = rng.random((10_000, 3))
    hcl = rgb_to_hcl_array(rgb)
    r, g, b = rgb[:, 0], rgb[:, 1], rgb[:, 2]
    chroma = rgb.max(axis=1) - rgb.min(axis=1)
    arg = rgb.argmax(axis=1)
    expected = np.where(
        arg == 0, (g - b) / (6 * chroma),
        np.where(arg == 1, (b - r) / (6 * chroma) + 1.0 / 3.0, (r - g) / (6 * chroma) + 2.0 / 3.0)
    )
    expected = np.mod(expected, 1.0)
    assert np.array_equal(hcl[:, 0], expected)


@pytest.mark.parametrize("hcl, expected", [
    ((0.0, 1.0, 0.0), (1.0, 0.0, 0.0)),
    ((0.0, 0.0, 1.0), (1.0, 1.0, 1.0)),
    ((1.0 / 3.0, 1.0, 0.0), (0.0, 1.0, 0.0)),
    ((0.0, 0.0, 0.0), (0.5, 0.5, 0.5)),
])
def test_hcl_to_rgb_examples(hcl, expected):
    rgb = hcl_to_rgb(HclColor(*hcl))
    assert (rgb.r, rgb.g, rgb.b) == pytest.approx(expected, abs=1e-15)


def test_hcl_to_rgb_rejects_points_outside_bicone():
    with pytest.raises(DomainError):
        hcl_to_rgb(HclColor(0.0, 1.0, 0.5))
    with pytest.raises(DomainError):
        hcl_to_rgb(HclColor(1.0, 0.1, 0.0))


def test_rgb_component_validation():
    with pytest.raises(DomainError):
        RgbColor(1.5, 0.0, 0.0)


def test_rgb_hcl_round_trip_million_samples():
    rng = np.random.default_rng(2024)
    rgb = rng.random((1_000_000, 3))
    back = hcl_to_rgb_array(rgb_to_hcl_array(rgb))
    assert np.max(np.abs(back - rgb)) <= 1e-12


def test_hcl_round_trip_for_chromatic_colours():
    rng = np.random.default_rng(11)
    hcl = rgb_to_hcl_array(rng.random((100_000, 3)))
    again = rgb_to_hcl_array(hcl_to_rgb_array(hcl))
    chromatic = hcl[:, 1] > 1e-6
    # hue differences are compared on the circle
    dh = np.abs(again[:, 0] - hcl[:, 0])
    dh = np.minimum(dh, 1.0 - dh)
    assert np.max(dh[chromatic] * hcl[chromatic, 1]) <= 1e-12
    assert np.max(np.abs(again[:, 1:] - hcl[:, 1:])) <= 1e-12


def test_converted_colours_lie_in_bicone():
    rng = np.random.default_rng(3)
    xyz = hcl_to_cartesian_array(rgb_to_hcl_array(rng.random((100_000, 3))))
    radius = np.hypot(xyz[:, 0], xyz[:, 1])
    assert np.all(radius <= 1.0 - np.abs(xyz[:, 2]) + 1e-12)


@pytest.mark.parametrize("hcl, expected", [
    ((0.0, 1.0, 0.0), (1.0, 0.0, 0.0)),
    ((0.25, 0.5, 0.5), (0.0, 0.5, 0.5)),
    ((0.0, 0.0, -1.0), (0.0, 0.0, -1.0)),
])
def test_hcl_to_cartesian_examples(hcl, expected):
    v = hcl_to_cartesian(HclColor(*hcl))
    assert (v.x, v.y, v.z) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("xyz, expected", [
    ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)),
    ((0.0, 0.0, 1.0), (0.0, 0.0, 1.0)),
    ((0.0, -0.5, 0.0), (0.75, 0.5, 0.0)),
])
def test_cartesian_to_hcl_examples(xyz, expected):
    assert _hcl(cartesian_to_hcl(CartesianColor(*xyz))) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("xyz, expected", [
    ((1.0, 0.0, 0.0), (0.0, SQRT1_2, 0.0)),
    ((0.0, 0.0, 1.0), (SQRT1_2, 0.0, SQRT1_2)),
    ((0.0, 0.0, -1.0), (-SQRT1_2, 0.0, -SQRT1_2)),
])
def test_cartesian_to_matrix_examples(xyz, expected):
    m = cartesian_to_matrix(CartesianColor(*xyz))
    assert (m.a, m.b, m.c) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("abc, expected", [
    ((0.0, SQRT1_2, 0.0), (1.0, 0.0, 0.0)),
    ((SQRT1_2, 0.0, SQRT1_2), (0.0, 0.0, 1.0)),
    ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0)),
])
def test_matrix_to_cartesian_examples(abc, expected):
    v = matrix_to_cartesian(SymMatrix2(*abc))
    assert (v.x, v.y, v.z) == pytest.approx(expected, abs=1e-15)


def test_cartesian_matrix_round_trip():
    rng = np.random.default_rng(5)
    xyz = rng.uniform(-1.0, 1.0, size=(100_000, 3))
    back = matrix_to_cartesian_array(cartesian_to_matrix_array(xyz))
    assert np.max(np.abs(back - xyz)) <= 1e-14

    abc = rng.uniform(-1.0, 1.0, size=(100_000, 3))
    assert np.max(np.abs(cartesian_to_matrix_array(matrix_to_cartesian_array(abc)) - abc)) <= 1e-14


def test_cartesian_hcl_round_trip():
    rng = np.random.default_rng(6)
    hcl = rgb_to_hcl_array(rng.random((100_000, 3)))
    back = cartesian_to_hcl_array(hcl_to_cartesian_array(hcl))
    assert np.max(np.abs(back[:, 1:] - hcl[:, 1:])) <= 1e-14
    dh = np.abs(back[:, 0] - hcl[:, 0])
    assert np.max(np.minimum(dh, 1.0 - dh) * hcl[:, 1]) <= 1e-14


def test_scalar_and_array_paths_agree():
    colour = RgbColor(0.2, 0.7, 0.4)
    m = rgb_to_matrix(colour)
    assert np.array_equal(
        m.as_array(),
        cartesian_to_matrix_array(hcl_to_cartesian_array(rgb_to_hcl_array(colour.as_array())))
    )
    back = matrix_to_hcl(m)
    assert back.lm == pytest.approx(rgb_to_hcl(colour).lm, abs=1e-15)


def test_white_and_black_matrices_are_scaled_identities():
    white = rgb_to_matrix(RgbColor(1.0, 1.0, 1.0))
    black = rgb_to_matrix(RgbColor(0.0, 0.0, 0.0))
    assert (white.a, white.b, white.c) == (SQRT1_2, 0.0, SQRT1_2)
    assert (black.a, black.b, black.c) == (-SQRT1_2, 0.0, -SQRT1_2)


def test_sym_matrix_rejects_non_finite_entries():
    with pytest.raises(DomainError):
        SymMatrix2(float("nan"), 0.0, 0.0)
