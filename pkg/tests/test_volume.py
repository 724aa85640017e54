import json

import numpy as np
import pytest

from hilbertpoly.errors import InsufficientSamples, InvalidVertex, PointOutside
from hilbertpoly.metric import distance_birkhoff, finsler_norm
from hilbertpoly.polytope import regular_polygon, sample_interior, unit_cube, unit_square
from hilbertpoly.volume import (ball_boundary, ball_volume, bernig_radius, density, fit_slope,
                                fit_window, growth_fit, ray_divergence_ratio, sphere_directions,
                                tangent_ball_volume, unit_ball_volume, unit_speed_slacks)

from conftest import random_polytope


def test_unit_ball_volume():
    assert unit_ball_volume(1) == pytest.approx(2.0)
    assert unit_ball_volume(2) == pytest.approx(np.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * np.pi / 3)


@pytest.mark.parametrize("n, k", [(2, 100), (3, 500), (4, 300)])
def test_sphere_directions_unit(n, k):
    D = sphere_directions(n, k)
    assert D.shape == (k, n)
    assert np.allclose(np.linalg.norm(D, axis=1), 1.0)


def test_tangent_volumes_square_center(square):
    # F = 2 max(|v1|, |v2|): unit square ball, polar is |x| + |y| <= 2
    c = [0.5, 0.5]
    assert tangent_ball_volume(square, c) == pytest.approx(1.0, rel=1e-12)
    assert tangent_ball_volume(square, c, polar=True) == pytest.approx(8.0, rel=1e-12)
    assert tangent_ball_volume(square, c, exact=False) == pytest.approx(1.0, rel=1e-4)
    assert tangent_ball_volume(square, c, polar=True, exact=False) == pytest.approx(8.0, rel=1e-4)
    assert density(square, c) == pytest.approx(np.pi)
    assert density(square, c, "holmes-thompson") == pytest.approx(8 / np.pi)


def test_tangent_volumes_cube_center(cube):
    c = [0.5] * 3
    assert tangent_ball_volume(cube, c) == pytest.approx(1.0, rel=1e-4)
    assert tangent_ball_volume(cube, c, polar=True) == pytest.approx(32 / 3, rel=1e-12)
    assert tangent_ball_volume(cube, c, polar=True, exact=False) == pytest.approx(32 / 3, rel=1e-3)


def test_tangent_ball_boundary_has_unit_norm(pentagon, rng):
    x = np.array([0.2, 0.1])
    area = tangent_ball_volume(pentagon, x)
    # polar-coordinate area from the norm itself
    a = np.linspace(0, 2 * np.pi, 20001)[:-1]
    r = np.array([1 / finsler_norm(pentagon, x, [np.cos(t), np.sin(t)]) for t in a])
    assert area == pytest.approx(0.5 * np.mean(r ** 2) * 2 * np.pi, rel=1e-6)


@pytest.mark.parametrize("h", [unit_square(), regular_polygon(5), unit_cube(3)])
def test_ball_boundary_at_radius(h):
    o = h.interior_point
    for R in (0.01, 1.0, 4.0, 12.0):
        ball = ball_boundary(h, o, R, 200)
        assert np.max(np.abs(ball.distances() - R)) <= 1e-12 * (1 + R)
    ball = ball_boundary(h, o, 2.0, 200)
    d = [distance_birkhoff(h, o, p) for p in ball.points]
    assert np.allclose(d, 2.0, atol=1e-9)
    assert ball.contains(h, o)


def test_ball_boundary_small_radius_is_finsler_ball(pentagon):
    o = pentagon.interior_point
    R = 1e-6
    ball = ball_boundary(pentagon, o, R, 50)
    F = np.array([finsler_norm(pentagon, o, u) for u in ball.directions])
    assert np.allclose(ball.t * F / R, 1.0, atol=1e-5)


def test_ball_boundary_rejects_bad_input(square):
    with pytest.raises(ValueError):
        ball_boundary(square, [0.5, 0.5], 0.0)
    with pytest.raises(PointOutside):
        ball_boundary(square, [1.5, 0.5], 1.0)


def test_unit_speed(square):
    L = unit_speed_slacks(square, [0.5, 0.5], [1.0, 1.0], [0.5, 2.0, 7.0])
    lo = square.slacks([0.5, 0.5])
    d = 0.5 * (np.log(lo / L).max(axis=1) - np.log(lo / L).min(axis=1))
    assert np.allclose(d, [0.5, 2.0, 7.0], rtol=1e-13)


def test_square_rays_are_geodesic_through_center(square):
    # opposite-vertex rays: x(t), o, y(t) lie on one geodesic, ratio is exactly 1
    for t in (1.0, 5.0, 20.0):
        assert ray_divergence_ratio(square, [0.5, 0.5], [0, 0], [1, 1], t) == pytest.approx(1.0, abs=1e-12)


def test_pentagon_rays_converge(pentagon):
    V = pentagon.vertices
    o = pentagon.interior_point
    r = [ray_divergence_ratio(pentagon, o, V[0], V[2], t) for t in (2, 5, 20, 40)]
    assert all(0.5 < x < 1 for x in r)
    assert np.all(np.diff(r) > 0)
    assert 1 - r[-1] < 0.02


def test_ray_errors(square):
    with pytest.raises(InvalidVertex):
        ray_divergence_ratio(square, [0.5, 0.5], [0.5, 0], [1, 1], 3.0)
    assert ray_divergence_ratio(square, [0.5, 0.5], [1, 1], [1, 1], 3.0) == 0.0


def test_fit_slope_exact_power_law():
    R = np.array([1, 2, 4, 8.0])
    s, hw = fit_slope(R, 3 * R ** 2.5, 1e-3 * R ** 2.5)
    assert s == pytest.approx(2.5, abs=1e-12)
    assert hw > 0
    # log-space midpoint of [1, 12] is sqrt(12) ~ 3.46
    assert fit_window([1, 2, 3, 5, 7, 9, 12]).tolist() == [3, 4, 5, 6]


def test_small_ball_volumes(square):
    # Busemann volume of a small ball -> omega R^2; Holmes-Thompson ->
    # vol(B) vol(B polar) / omega R^2 = 8/pi R^2 at the centre
    R = 0.005
    b = ball_volume(square, [0.5, 0.5], R, "busemann", samples=20000, seed=1)
    ht = ball_volume(square, [0.5, 0.5], R, "holmes-thompson", samples=20000, seed=1)
    assert b.estimate / R ** 2 == pytest.approx(np.pi, abs=5 * b.stderr / R ** 2 + 0.02)
    assert ht.estimate / R ** 2 == pytest.approx(8 / np.pi, abs=5 * ht.stderr / R ** 2 + 0.02)
    assert ht.estimate / b.estimate == pytest.approx(8 / np.pi ** 2, rel=0.01)


def test_bernig_and_box_samplers_agree(pentagon):
    o = pentagon.interior_point
    a = ball_volume(pentagon, o, 0.8, samples=40000, seed=3)
    b = ball_volume(pentagon, o, 0.8, samples=40000, seed=3, sampler="box")
    assert abs(a.estimate - b.estimate) <= 5 * np.hypot(a.stderr, b.stderr)


def test_ball_volume_reproducible_and_backend_independent(square):
    a = ball_volume(square, [0.4, 0.5], 2.0, samples=5000, seed=9, backend="numpy")
    b = ball_volume(square, [0.4, 0.5], 2.0, samples=5000, seed=9, backend="numpy")
    assert a == b
    est, se = a
    assert est > 0 and se > 0
    c = ball_volume(square, [0.4, 0.5], 2.0, samples=5000, seed=9)
    assert c.estimate == pytest.approx(a.estimate, rel=1e-10)
    json.dumps(a.to_json())


def test_ball_volume_errors(square):
    with pytest.raises(InsufficientSamples):
        ball_volume(square, [0.5, 0.5], 1.0, samples=10)
    with pytest.raises(ValueError):
        ball_volume(square, [0.5, 0.5], -1.0)
    with pytest.raises(ValueError):
        ball_volume(square, [0.5, 0.5], 1.0, measure="lebesgue")


def test_bernig_radius_covers_the_ball(pentagon):
    o = pentagon.interior_point
    rho = bernig_radius(pentagon, o, 3.0)
    ball = ball_boundary(pentagon, o, 3.0, 5000, seed=5)
    reach = np.linalg.norm((np.log(ball.slacks) - np.log(pentagon.slacks(o))) @ pentagon.gradients,
                           axis=1)
    assert reach.max() <= rho * (1 + 1e-9)


def test_growth_quick(square):
    fit = growth_fit(square, [0.5, 0.5], [1, 2, 4, 8], samples=20000, seed=0)
    assert fit.slope == pytest.approx(2.0, abs=0.3)
    assert len(fit.rows()) == 4
    json.dumps(fit.to_json())


def test_growth_rejects_bad_radii(square):
    with pytest.raises(ValueError):
        growth_fit(square, [0.5, 0.5], [1, 3, 2])


@pytest.mark.slow
def test_many_facets_grow_faster_at_moderate_radius():
    # the 64-gon is still in its pre-asymptotic regime at these radii
    h = regular_polygon(64)
    fit = growth_fit(h, [0, 0], [1, 2, 3, 5, 7, 9, 12], samples=200_000, seed=0)
    sq = growth_fit(unit_square(), [0.5, 0.5], [1, 2, 3, 5, 7, 9, 12], samples=200_000, seed=0)
    assert fit.slope > sq.slope
    assert fit.asvol > 5 * sq.asvol


def test_random_polytope_volume_positive(rng):
    h = random_polytope(rng, 3)
    o = sample_interior(h, 1, rng, shrink=0.3)[0]
    e = ball_volume(h, o, 1.0, samples=2000, seed=0)
    assert e.estimate > 0 and e.accepted > 0


def test_balls_are_nested(pentagon):
    o = pentagon.interior_point
    small = ball_boundary(pentagon, o, 1.0, 100)
    big = ball_boundary(pentagon, o, 1.5, 100)
    assert all(big.contains(pentagon, p) for p in small.points)
    assert not any(small.contains(pentagon, p + 1e-9 * (p - o)) for p in big.points)


def test_square_ball_is_symmetric(square):
    ball = ball_boundary(square, [0.5, 0.5], 3.0, 64)  # directions come in +-u pairs
    assert np.allclose(ball.t[:32], ball.t[32:], rtol=1e-12)


def test_simplex_ball_is_hexagonal_in_embedding():
    from hilbertpoly.embeddings import LogEmbedding
    from hilbertpoly.polytope import standard_simplex
    h = standard_simplex(2)
    o = np.array([1 / 3, 1 / 3])
    emb = LogEmbedding(h)
    ball = ball_boundary(h, o, 0.7, 120)
    norms = [emb.norm(emb(p) - emb(o)) for p in ball.points]
    assert np.allclose(norms, 0.7, atol=1e-6)


def test_volume_increases_with_radius(square):
    for m in ("busemann", "holmes-thompson"):
        assert (ball_volume(square, [0.5, 0.5], 2.0, m, samples=5000).estimate
                > ball_volume(square, [0.5, 0.5], 1.0, m, samples=5000).estimate)


# square, centre, R = 5, Busemann: 4e6-sample run with seed 100
SQUARE_R5 = (103.38103554987617, 0.04427931280420272)


def test_square_r5_regression():
    e = ball_volume(unit_square(), [0.5, 0.5], 5.0, samples=100_000, seed=0)
    ref, ref_se = SQUARE_R5
    assert abs(e.estimate - ref) <= 3 * np.hypot(e.stderr, ref_se)
