"""
Tests for the distance-based colour order
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.colorspace import HclColor, RgbColor, matrix_to_hcl, rgb_to_hcl, rgb_to_hcl_array, rgb_to_matrix
from src.distance import DistanceKind
from src.error_recovery import DomainError
from src.ordering import (
    hue_precedes,
    key_precedes,
    make_order_key,
    order_keys_array,
    select_infimum,
    select_supremum,
)
from src.spectral import lei, les

WHITE = rgb_to_hcl(RgbColor(1.0, 1.0, 1.0))
BLACK = rgb_to_hcl(RgbColor(0.0, 0.0, 0.0))


def reference(colours, upper=True):
    matrices = [rgb_to_matrix(RgbColor(*c)) for c in colours]
    return matrix_to_hcl(les(matrices) if upper else lei(matrices))


@pytest.mark.parametrize("h1, h2, h_ref, expected", [
    (np.pi, np.pi / 4, 0.0, True),
    (np.pi / 2, 3 * np.pi / 2, 0.0, True),
    (3 * np.pi / 2, np.pi / 2, 0.0, False),
    (np.pi / 4, np.pi, 0.0, False),
    (1.0, 1.0, 0.0, True),
])
def test_hue_precedes_examples(h1, h2, h_ref, expected):
    assert hue_precedes(h1, h2, h_ref) is expected


def test_order_key_of_reference_itself():
    colour = HclColor(0.3, 0.4, 0.1)
    key = make_order_key(colour, colour, DistanceKind.POLAR)
    assert key.dist == 0.0
    assert key.hue_dist == 0.0
    assert key.hue_wrap is True


@pytest.mark.parametrize("kind", [DistanceKind.MHYAB, DistanceKind.POLAR])
def test_order_key_black_against_white(kind):
    key = make_order_key(BLACK, WHITE, kind)
    assert key.dist == pytest.approx(2.0, abs=1e-15)
    assert (key.lm, key.c) == (-1.0, 0.0)


def test_equal_colours_give_identical_keys():
    ref = HclColor(0.6, 0.2, -0.3)
    a = rgb_to_hcl(RgbColor(0.25, 0.5, 0.75))
    b = rgb_to_hcl(RgbColor(0.25, 0.5, 0.75))
    for kind in DistanceKind:
        assert make_order_key(a, ref, kind) == make_order_key(b, ref, kind)


@pytest.mark.parametrize("kind", list(DistanceKind))
def test_selection_of_singleton(kind):
    assert select_supremum([WHITE], WHITE, kind) == 0
    assert select_infimum([WHITE], BLACK, kind) == 0


@pytest.mark.parametrize("kind", list(DistanceKind))
def test_white_black_selection_through_references(kind):
    colours = [(0.0, 0.0, 0.0), (1.0, 1.0, 1.0)]
    hcl = [rgb_to_hcl(RgbColor(*c)) for c in colours]
    assert select_supremum(hcl, reference(colours, upper=True), kind) == 1
    assert select_infimum(hcl, reference(colours, upper=False), kind) == 0


@pytest.mark.parametrize("kind", list(DistanceKind))
def test_duplicate_colours_select_first_index(kind):
    red = rgb_to_hcl(RgbColor(1.0, 0.0, 0.0))
    grey = rgb_to_hcl(RgbColor(0.5, 0.5, 0.5))
    assert select_supremum([grey, red, red], red, kind) == 1
    assert select_infimum([grey, red, red], red, kind) == 1


def test_selection_rejects_empty_list():
    with pytest.raises(DomainError):
        select_supremum([], WHITE, DistanceKind.MHYAB)
    with pytest.raises(DomainError):
        select_infimum([], BLACK, DistanceKind.MHYAB)


def test_ties_prefer_brighter_then_darker_for_the_dual():
    # both greys are 0.25 away from mid grey
    light = HclColor(0.0, 0.0, 0.25)
    dark = HclColor(0.0, 0.0, -0.25)
    mid = HclColor(0.0, 0.0, 0.0)
    assert select_supremum([dark, light], mid, DistanceKind.MHYAB) == 1
    assert select_infimum([dark, light], mid, DistanceKind.MHYAB) == 0


def test_vectorised_selection_matches_sorted_keys():
    rng = np.random.default_rng(17)
    for _ in range(500):
        n = int(rng.integers(1, 10))
        # a small palette forces frequent key ties
        palette = rgb_to_hcl_array(rng.integers(0, 3, size=(3, 3)) / 2.0)
        hcl = palette[rng.integers(0, 3, size=n)]
        colours = [HclColor(*row) for row in hcl]
        ref = HclColor(*rgb_to_hcl_array(rng.random(3)))
        for kind in DistanceKind:
            for dual, select in ((False, select_supremum), (True, select_infimum)):
                fields = order_keys_array(hcl, ref.as_array(), kind)
                sign = 1.0 if dual else -1.0
                keys = list(zip(
                    fields.dist, sign * fields.lm, sign * fields.c, fields.hue_dist, fields.hue_wrap
                ))
                expected = min(range(n), key=lambda i: (keys[i], i))
                assert select(colours, ref, kind) == expected


def _precedes(a, b):
    """Lexicographic strict order on tuples of equal-shape arrays."""
    lt = np.zeros(a[0].shape, dtype=bool)
    eq = np.ones(a[0].shape, dtype=bool)
    for x, y in zip(a, b):
        lt |= eq & (x < y)
        eq &= x == y
    return lt


@pytest.mark.parametrize("kind", list(DistanceKind))
@pytest.mark.parametrize("dual", [False, True])
def test_comparator_laws_on_random_triples(kind, dual):
    rng = np.random.default_rng(5)
    n = 100_000
    # 3-level RGB palette so equal fields occur often
    colours = [rgb_to_hcl_array(rng.integers(0, 3, size=(n, 3)) / 2.0) for _ in range(3)]
    ref = rgb_to_hcl_array(rng.random((n, 3)))
    sign = 1.0 if dual else -1.0

    def tuple_of(hcl):
        k = order_keys_array(hcl, ref, kind)
        return (k.dist, sign * k.lm, sign * k.c, k.hue_dist, k.hue_wrap.astype(np.int8))

    k1, k2, k3 = (tuple_of(c) for c in colours)
    assert not np.any(_precedes(k1, k1))
    assert not np.any(_precedes(k1, k2) & _precedes(k2, k1))
    chain = _precedes(k1, k2) & _precedes(k2, k3)
    assert np.all(_precedes(k1, k3)[chain])


def test_key_precedes_agrees_with_dual_flip():
    ref = HclColor(0.0, 0.0, 0.0)
    bright = make_order_key(HclColor(0.0, 0.0, 0.5), ref, DistanceKind.POLAR)
    dim = make_order_key(HclColor(0.0, 0.0, -0.5), ref, DistanceKind.POLAR)
    assert key_precedes(bright, dim)
    assert key_precedes(dim, bright, dual=True)


@pytest.mark.parametrize("kind", list(DistanceKind))
def test_infimum_matches_supremum_of_negated_achromatic_colours(kind):
    rng = np.random.default_rng(23)
    for _ in range(300):
        n = int(rng.integers(1, 9))
        lm = rng.choice(np.linspace(-1.0, 1.0, 9), size=n)
        ref_lm = float(rng.uniform(-1.0, 1.0))
        colours = [HclColor(0.0, 0.0, float(v)) for v in lm]
        negated = [HclColor(0.0, 0.0, float(-v)) for v in lm]
        assert select_infimum(colours, HclColor(0.0, 0.0, ref_lm), kind) == \
            select_supremum(negated, HclColor(0.0, 0.0, -ref_lm), kind)
