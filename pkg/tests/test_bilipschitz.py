import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hilbertpoly.bilipschitz import (DualVector, bernig_map, bernig_preimage, distortion_report,
                                     finsler_comparison, interval_ratios, sample_at_depth)
from hilbertpoly.errors import InvalidNeighborhood, NoPreimage, WrongDimension
from hilbertpoly.polytope import interval, sample_interior, unit_square

from conftest import SHARED_TRIANGLE, random_polytope


def test_dual_vector():
    f = DualVector([3.0, 4.0])
    assert f([1, 1]) == 7.0
    assert f.norm() == 5.0
    with pytest.raises(ValueError):
        DualVector([np.inf, 0.0])


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_bernig_map_square_closed_form(x, y):
    # facets x, y, 1-x, 1-y with gradients e1, e2, -e1, -e2
    w = bernig_map(unit_square(), [x, y]).coords
    assert np.allclose(w, [np.log(x / (1 - x)), np.log(y / (1 - y))], atol=1e-13)


def test_bernig_map_center_of_symmetry(square, pentagon):
    assert np.allclose(bernig_map(square, [0.5, 0.5]).coords, 0, atol=1e-15)
    assert np.allclose(bernig_map(pentagon, [0.0, 0.0]).coords, 0, atol=1e-14)


@pytest.mark.parametrize("n", [2, 3])
def test_bernig_preimage_roundtrip(n, rng):
    h = random_polytope(rng, n)
    for x in sample_interior(h, 20, rng):
        y = bernig_preimage(h, bernig_map(h, x).coords)
        assert np.allclose(y, x, atol=1e-9)


def test_bernig_preimage_far_targets(square):
    # the map is onto R^n: even huge targets have a preimage near a vertex
    x = bernig_preimage(square, np.array([20.0, -20.0]))
    assert np.allclose(bernig_map(square, x).coords, [20, -20], atol=1e-6)
    with pytest.raises(WrongDimension):
        bernig_preimage(square, np.zeros(3))
    with pytest.raises(NoPreimage):
        bernig_preimage(square, np.array([1e6, 0.0]))


def test_sample_at_depth(pentagon, rng):
    for depth in (1e-2, 1e-5, 1e-9):
        X, L = sample_at_depth(pentagon, depth, 200, rng)
        assert np.allclose(L.min(axis=1), depth, rtol=1e-9)
        assert np.allclose(pentagon.slacks(X), L, atol=1e-12)
    with pytest.raises(ValueError):
        sample_at_depth(pentagon, 5.0, 10, rng)


def test_interval_ratio_is_two():
    r = interval_ratios(interval(-1.0, 3.0), 2000, seed=4)
    assert len(r) > 1900
    assert np.max(np.abs(r - 2.0)) <= 1e-12 * 2


def test_interval_ratios_dimension(square):
    with pytest.raises(WrongDimension):
        interval_ratios(square)


@pytest.mark.parametrize("seed", [0, 1])
def test_distortion_square(square, seed):
    rep = distortion_report(square, pairs=300, seed=seed)
    assert np.isfinite(rep.spread) and rep.spread >= 1
    assert 0 < rep.min_ratio <= rep.max_ratio < np.inf
    assert rep.passes
    assert len(rep.rows()) == len(rep.strata)
    json.dumps(rep.to_json())


def test_distortion_seed_stable(pentagon):
    a = distortion_report(pentagon, pairs=300, seed=0).spread
    b = distortion_report(pentagon, pairs=300, seed=1).spread
    assert abs(a - b) <= 0.1 * max(a, b)


def test_finsler_comparison_identical_polytopes(square):
    rep = finsler_comparison(square, square, SHARED_TRIANGLE, samples=500, directions=90)
    assert rep.min_ratio == pytest.approx(1.0, abs=1e-12)
    assert rep.max_ratio == pytest.approx(1.0, abs=1e-12)
    assert rep.widening == pytest.approx(0.0, abs=1e-12)


def test_finsler_comparison_pair(shared_pair):
    hA, hB, S = shared_pair
    rep = finsler_comparison(hA, hB, S, samples=2000, directions=180, seed=1)
    assert rep.shared_vertex == 2
    assert 0 < rep.min_ratio <= rep.max_ratio < 3
    assert rep.widening <= 0.1
    json.dumps(rep.to_json())


def test_finsler_comparison_needs_shared_face(shared_pair):
    hA, hB, _ = shared_pair
    inner = np.array([(0.2, 0.2), (0.4, 0.2), (0.3, 0.4)])
    with pytest.raises(InvalidNeighborhood):
        finsler_comparison(hA, hB, inner, samples=100)
    outside = np.array([(0, 0), (2.0, 0), (0.25, 0.4)])
    with pytest.raises(InvalidNeighborhood):
        finsler_comparison(hA, hB, outside, samples=100)
