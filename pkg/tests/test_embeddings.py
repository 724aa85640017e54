import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hilbertpoly.embeddings import (BarycentricPoint, LogEmbedding, PolyhedralNorm,
                                    embed_polytope, norm_unit_ball_section, polygon_vertex_angles,
                                    ratio_coords, ratio_coords_inverse, simplex_distance,
                                    simplex_embed, simplex_embed_inverse, simplex_section_lift,
                                    zero_sum_basis)
from hilbertpoly.errors import DegenerateInput, NoPreimage, PointOutside, WrongDimension
from hilbertpoly.metric import distance_birkhoff
from hilbertpoly.polytope import sample_interior, standard_simplex

from conftest import interior_pairs, random_polytope

weights = st.integers(2, 7).flatmap(
    lambda m: arrays(float, m, elements=st.floats(1e-3, 1.0)))


def test_barycentric_validation():
    with pytest.raises(PointOutside):
        BarycentricPoint(np.array([0.5, 0.5, 0.0]))
    with pytest.raises(DegenerateInput):
        BarycentricPoint(np.array([0.5, 0.6]))
    assert BarycentricPoint.normalize([1, 1, 2]).weights.tolist() == [0.25, 0.25, 0.5]


def test_polyhedral_norm():
    N = PolyhedralNorm(3)
    assert N([1.0, -2.0, 0.5]) == 1.5
    assert N([4.0, 4.0, 4.0]) == 0.0
    F = N.functionals()
    w = np.array([0.3, -1.0, 2.0])
    assert np.max(F @ w) == pytest.approx(N(w))


@given(weights)
def test_simplex_roundtrip(w):
    p = BarycentricPoint.normalize(w)
    back = simplex_embed_inverse(simplex_embed(p))
    assert np.max(np.abs(back.weights - p.weights)) <= 1e-12


@given(arrays(float, 3, elements=st.floats(1e-3, 1.0)))
def test_ratio_roundtrip(w):
    p = BarycentricPoint.normalize(w)
    r = ratio_coords(p)
    assert abs(r.sum()) <= 1e-12
    assert np.max(np.abs(ratio_coords_inverse(r).weights - p.weights)) <= 1e-12


def test_ratio_requires_triangle():
    with pytest.raises(WrongDimension):
        ratio_coords(np.ones(4) / 4)
    with pytest.raises(DegenerateInput):
        ratio_coords_inverse([1.0, 1.0, 1.0])


def test_barycenter_maps_to_zero():
    for m in range(2, 8):
        assert np.all(simplex_embed(np.full(m, 1.0 / m)) == 0.0)
    assert np.all(ratio_coords(np.full(3, 1.0 / 3)) == 0.0)


def test_simplex_distance_matches_metric(rng):
    h = standard_simplex(3)
    P, Q = interior_pairs(h, 30, rng)
    for p, q in zip(P, Q):
        a = np.concatenate([[1 - p.sum()], p])
        b = np.concatenate([[1 - q.sum()], q])
        assert simplex_distance(a, b) == pytest.approx(distance_birkhoff(h, p, q), rel=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_log_embedding_is_isometric(n, rng):
    h = random_polytope(rng, n, max_facets=10)
    emb = LogEmbedding(h)
    assert emb.target_dim == h.n_facets - 1
    P, Q = interior_pairs(h, 50, rng)
    for p, q in zip(P, Q):
        d = distance_birkhoff(h, p, q)
        assert abs(emb.distance(p, q) - d) <= 1e-9 * (1 + d)


def test_lift_realizes_polytope_as_simplex_section(pentagon, rng):
    lift = simplex_section_lift(pentagon)
    assert lift.target_dim == 4
    X = sample_interior(pentagon, 20, rng)
    Y = lift(X)
    assert np.all(lift.simplex.slacks(Y).min(axis=1) > 0)
    bary = lift.barycentric(Y)
    assert np.allclose(bary.sum(axis=1), 1.0)
    # barycentric weights are the rescaled facet slacks
    expect = (pentagon.slacks(X) * lift.scales)[:, list(lift.order)]
    assert np.allclose(bary, expect, atol=1e-12)
    for i in lift.section_coordinates():
        assert i < lift.target_dim + 1


def test_preimage(pentagon, rng):
    emb = LogEmbedding(pentagon)
    for x in sample_interior(pentagon, 10, rng):
        assert np.allclose(emb.preimage(emb(x)), x, atol=1e-9)
    with pytest.raises(NoPreimage):
        emb.preimage(np.array([3.0, -1.0, 0.5, 2.0, 0.0]))


def test_embedding_json(square):
    doc = json.loads(LogEmbedding(square).dumps())
    assert doc["target_dim"] == 3 and len(doc["functionals"]) == 4
    assert embed_polytope(square, [0.5, 0.5]).shape == (4,)


def test_zero_sum_basis():
    B = zero_sum_basis(5)
    assert np.allclose(B @ B.T, np.eye(4))
    assert np.allclose(B.sum(axis=1), 0)


def test_hexagonal_unit_ball():
    V = norm_unit_ball_section(3)
    assert len(V) == 6
    ang = polygon_vertex_angles(V)
    assert np.ptp(ang) <= 1e-9
    assert ang.mean() == pytest.approx(2 * np.pi / 3)


def test_square_vertex_angles():
    V = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    assert np.allclose(polygon_vertex_angles(V), np.pi / 2)


def test_simplex_oracle_pair():
    p, q = [0.5, 0.25, 0.25], [0.25, 0.5, 0.25]
    assert PolyhedralNorm(3)(simplex_embed(p) - simplex_embed(q)) == pytest.approx(np.log(2))
    h = standard_simplex(2)
    assert distance_birkhoff(h, p[1:], q[1:]) == pytest.approx(np.log(2), rel=1e-14)


def test_inverse_by_direct_formula():
    x, y, z = np.log(2), 0.0, -np.log(2)
    num = np.array([np.exp(x + y), np.exp(y), 1.0])
    # the printed normalizer e^x + e^(x+y) + 1 is not the sum of the numerators
    printed = num / (np.exp(x) + np.exp(x + y) + 1)
    assert np.allclose(ratio_coords(printed), [x, y, z], atol=1e-12)
    assert printed.sum() != pytest.approx(1.0)
    w = ratio_coords_inverse([x, y, z]).weights
    assert np.allclose(w, num / num.sum(), atol=1e-15)
    assert np.allclose(ratio_coords(w), [x, y, z], atol=1e-12)


def test_ratio_triple_and_log_class_give_same_distance(rng):
    # the triple holds the three pairwise log-ratios, so half its sup norm is the distance
    for _ in range(100):
        p, q = rng.dirichlet(np.ones(3)), rng.dirichlet(np.ones(3))
        a = 0.5 * np.max(np.abs(ratio_coords(p) - ratio_coords(q)))
        assert a == pytest.approx(simplex_distance(p, q), rel=1e-12, abs=1e-15)


def test_lift_membership_on_square(square, rng):
    lift = simplex_section_lift(square)
    assert lift.target_dim == 3
    g = (np.arange(10) + 0.5) / 10
    inside = np.array([(x, y) for x in g for y in g])
    outside = rng.uniform(-1, 2, size=(400, 2))
    outside = outside[np.min(square.slacks(outside), axis=1) < 0][:100]
    for X, expect in ((inside, True), (outside, False)):
        got = np.min(lift.simplex.slacks(lift(X)), axis=1) > 0
        assert np.all(got == expect)


def test_simplex_lift_is_identity():
    h = standard_simplex(2)
    lift = simplex_section_lift(h)
    assert lift.target_dim == 2
    x = np.array([0.2, 0.3])
    assert sorted(lift.barycentric(lift(x))) == pytest.approx(sorted([0.5, 0.2, 0.3]))


def test_square_embedding_not_onto(square):
    # only a simplex embeds onto its target space
    with pytest.raises(NoPreimage):
        LogEmbedding(square).preimage(np.array([1.0, 0.0, 0.0, 0.0]))
