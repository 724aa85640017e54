"""Acceptance criteria, one test each.

Every test records a single ``criterion N: PASS|FAIL`` line (printed in the
terminal summary) and then asserts the criterion at its stated tolerance.
"""
import time

import numpy as np
import pytest

from hilbertpoly.bilipschitz import distortion_report, finsler_comparison, interval_ratios
from hilbertpoly.embeddings import (BarycentricPoint, LogEmbedding, norm_unit_ball_section,
                                    polygon_vertex_angles, ratio_coords, ratio_coords_inverse,
                                    simplex_embed, simplex_embed_inverse)
from hilbertpoly.metric import (distance_alexander, distance_birkhoff, distance_crossratio,
                                finsler_norm)
from hilbertpoly.polytope import (interval, regular_polygon, sample_interior, unit_cube,
                                  unit_square)
from hilbertpoly.volume import growth_fit, ray_divergence_ratio

from conftest import ACCEPTANCE, random_polytope, random_projective_map


def record(k, ok, detail):
    line = f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[k] = line
    print(line)
    return ok


def test_criterion_01_three_formulas():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    dev2 = 0.0
    count2 = 0
    while count2 < 1000:
        h = random_polytope(rng, 2, points=int(rng.integers(3, 12)))
        for p, q in zip(sample_interior(h, 5, rng), sample_interior(h, 5, rng)):
            d = [distance_crossratio(h, p, q), distance_birkhoff(h, p, q),
                 distance_alexander(h, p, q)]
            dev2 = max(dev2, max(d) - min(d))
            count2 += 1
    dev34 = 0.0
    count34 = 0
    for n in (3, 4):
        for _ in range(50):
            h = random_polytope(rng, n, points=int(rng.integers(n + 2, 12)))
            for p, q in zip(sample_interior(h, 5, rng), sample_interior(h, 5, rng)):
                dev34 = max(dev34, abs(distance_crossratio(h, p, q) - distance_birkhoff(h, p, q)))
                count34 += 1
    elapsed = time.perf_counter() - start
    ok = dev2 <= 1e-8 and dev34 <= 1e-8 and elapsed < 10
    assert record(1, ok, f"2-D max dev {dev2:.2e} over {count2}, 3/4-D {dev34:.2e} over "
                         f"{count34}, {elapsed:.1f} s")


def test_criterion_02_projective_invariance():
    rng = np.random.default_rng(102)
    dev = 0.0
    for k in range(100):
        n = 2 + k % 2
        h = random_polytope(rng, n, points=n + 4)
        T = random_projective_map(rng, h)
        g = T.image(h)
        for p, q in zip(sample_interior(h, 5, rng), sample_interior(h, 5, rng)):
            dev = max(dev, abs(distance_birkhoff(g, T(p), T(q)) - distance_birkhoff(h, p, q)))
    assert record(2, dev <= 1e-7, f"max dev {dev:.2e} over 100 maps")


def test_criterion_03_isometric_embedding():
    rng = np.random.default_rng(103)
    polys = [unit_square(), regular_polygon(5), unit_cube(3)]
    polys += [random_polytope(rng, 2 + k % 3, max_facets=10) for k in range(5)]
    dev = 0.0
    dims_ok = True
    for h in polys:
        emb = LogEmbedding(h)
        dims_ok &= emb.target_dim == h.n_facets - 1
        for p, q in zip(sample_interior(h, 200, rng), sample_interior(h, 200, rng)):
            dev = max(dev, abs(distance_birkhoff(h, p, q) - emb.norm(emb(p) - emb(q))))
    assert record(3, dev <= 1e-8 and dims_ok,
                  f"max dev {dev:.2e} over {len(polys)} polytopes x 200 pairs, "
                  f"target dim == N: {dims_ok}")


def test_criterion_04_simplex_bijection():
    rng = np.random.default_rng(104)
    err = 0.0
    for k in range(100):
        m = 3 + k % 4
        p = BarycentricPoint.normalize(rng.dirichlet(np.ones(m)))
        err = max(err, np.abs(simplex_embed_inverse(simplex_embed(p)).weights - p.weights).max())
        if m == 3:
            err = max(err, np.abs(ratio_coords_inverse(ratio_coords(p)).weights - p.weights).max())
    zero = all(np.all(simplex_embed(np.full(m, 1.0 / m)) == 0) for m in range(2, 9))
    zero &= bool(np.all(ratio_coords(np.full(3, 1.0 / 3)) == 0))
    assert record(4, err <= 1e-10 and zero, f"roundtrip err {err:.2e}, barycenter -> 0: {zero}")


def test_criterion_05_finsler_consistency():
    # base points in the central half (shrink 0.5), unit directions
    rng = np.random.default_rng(105)
    t = 1e-6
    polys = [unit_square(), regular_polygon(5), unit_cube(3), random_polytope(rng, 3),
             random_polytope(rng, 4)]
    dev = 0.0
    for h in polys:
        for p in sample_interior(h, 100, rng, shrink=0.5):
            v = rng.normal(size=h.dim)
            v /= np.linalg.norm(v)
            dev = max(dev, abs(distance_birkhoff(h, p, p + t * v) / t - finsler_norm(h, p, v)))
    assert record(5, dev <= 1e-4, f"max |d/t - F| {dev:.2e} at t=1e-6 on {len(polys)} polytopes")


def test_criterion_06_growth_order():
    start = time.perf_counter()
    sq = growth_fit(unit_square(), [0.5, 0.5], [1, 2, 3, 5, 7, 9, 12], samples=1_000_000, seed=0)
    cu = growth_fit(unit_cube(3), [0.5] * 3, [1, 2, 3, 4, 6, 8, 10], samples=1_000_000, seed=0)
    elapsed = time.perf_counter() - start
    ok = (abs(sq.slope - 2.0) <= 0.2 and abs(cu.slope - 3.0) <= 0.3 and sq.plateau
          and cu.plateau and elapsed < 300)
    assert record(6, ok, f"square slope {sq.slope:.3f} asvol {sq.asvol:.3f} plateau {sq.plateau}; "
                         f"cube slope {cu.slope:.3f} asvol {cu.asvol:.3f} plateau {cu.plateau}; "
                         f"{elapsed:.0f} s")


def test_criterion_07_ray_divergence():
    # rays from the centre to the two ends of each diagonal
    h = unit_square()
    o = [0.5, 0.5]
    pairs = [([0, 0], [1, 1]), ([1, 0], [0, 1])]
    in_band = True
    closer = True
    vals = []
    for v1, v2 in pairs:
        r20 = ray_divergence_ratio(h, o, v1, v2, 20.0)
        r40 = ray_divergence_ratio(h, o, v1, v2, 40.0)
        vals.append((r20, r40))
        in_band &= 0.95 <= r20 <= 1.0 + 1e-12
        closer &= abs(1 - r40) < abs(1 - r20)
    detail = ", ".join(f"{a!r}->{b!r}" for a, b in vals)
    assert record(7, in_band and closer,
                  f"ratio t=20 -> t=40: {detail}; in band {in_band}, strictly closer {closer}")


def test_criterion_08_bernig():
    r = interval_ratios(interval(0.0, 1.0), 2000, seed=0)
    exact = float(np.max(np.abs(r - 2.0) / 2.0))
    spreads = {}
    for name, h in (("square", unit_square()), ("cube", unit_cube(3))):
        spreads[name] = [distortion_report(h, seed=s).spread for s in (0, 1)]
    finite = all(np.isfinite(v).all() for v in spreads.values())
    stable = all(abs(a - b) <= 0.1 * max(a, b) for a, b in spreads.values())
    ok = exact <= 1e-12 and finite and stable
    detail = "; ".join(f"{k} spread {a:.3f}/{b:.3f}" for k, (a, b) in spreads.items())
    assert record(8, ok, f"interval rel err {exact:.1e}; {detail}")


def test_criterion_09_finsler_comparison(shared_pair):
    hA, hB, S = shared_pair
    rep = finsler_comparison(hA, hB, S, depths=(1e-3, 1e-6), samples=10000, seed=0)
    bands = ", ".join(f"[{lo:.4f}, {hi:.4f}]" for lo, hi in rep.bands)
    assert record(9, rep.widening <= 0.1, f"bands {bands}, widening {rep.widening:+.4f}")


def test_criterion_10_hexagon():
    V = norm_unit_ball_section(3)
    ang = polygon_vertex_angles(V)
    spread = float(np.ptp(ang))
    ok = len(V) == 6 and spread <= 1e-6
    assert record(10, ok, f"{len(V)} extreme points, angle spread {spread:.1e}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
