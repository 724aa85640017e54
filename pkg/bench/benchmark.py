"""Compiled kernels vs the numpy fallback on the Monte Carlo hot path.

    python bench/benchmark.py [--samples 20000] [--repeat 3] [--json out.json]

Checks that both backends return the same numbers before timing them.
"""
import argparse
import json
import time

import numpy as np

from hilbertpoly import _backend
from hilbertpoly.polytope import regular_polygon, unit_cube, unit_square
from hilbertpoly.volume import ball_volume, bernig_radius, sphere_directions


def best_of(f, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = f()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases(samples):
    rng = np.random.default_rng(0)
    for name, h, R, measure in [("square", unit_square(), 5.0, 0),
                                ("square-ht", unit_square(), 5.0, 1),
                                ("64-gon", regular_polygon(64), 5.0, 0),
                                ("cube", unit_cube(3), 5.0, 0)]:
        o = h.interior_point
        G = np.ascontiguousarray(h.gradients)
        c = np.ascontiguousarray(h.offsets)
        lo = h.slacks(o)
        rho = 1.05 * bernig_radius(h, o, R)
        Z = rng.normal(size=(samples, h.dim))
        Z /= np.linalg.norm(Z, axis=1)[:, None]
        Z *= rng.random(samples)[:, None] ** (1 / h.dim)
        Y = np.ascontiguousarray(np.log(lo) @ G + rho * Z)
        verts = np.ascontiguousarray(h.vertices)
        dirs = np.ascontiguousarray(sphere_directions(h.dim, 2000))
        yield name, (G, c, lo, R, Y, o, verts, dirs, measure), h


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json")
    args = ap.parse_args(argv)
    if _backend.compiled is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e .` first")
    kernels = {"numpy": _backend.pure, "cython": _backend.compiled}
    rows = []
    print(f"{'case':<12}{'kernel':<18}{'numpy s':>10}{'cython s':>10}{'speedup':>9}{'max rel diff':>14}")
    for name, a, h in cases(args.samples):
        G, c, lo, R, Y, o, verts, dirs, measure = a
        jobs = {
            "bernig_inverse": lambda k: k.bernig_inverse(G, c, Y, o)[0],
            "mc_ball_weights": lambda k: k.mc_ball_weights(G, c, lo, R, Y, o, verts, dirs, measure)[0],
        }
        for job, f in jobs.items():
            t = {}
            res = {}
            for kname, k in kernels.items():
                t[kname], res[kname] = best_of(lambda: f(k), args.repeat)
            scale = np.abs(res["numpy"]).max() or 1.0
            diff = float(np.abs(res["numpy"] - res["cython"]).max() / scale)
            row = {"case": name, "kernel": job, "samples": args.samples,
                   "numpy_s": t["numpy"], "cython_s": t["cython"],
                   "speedup": t["numpy"] / t["cython"], "max_rel_diff": diff}
            rows.append(row)
            print(f"{name:<12}{job:<18}{t['numpy']:>10.3f}{t['cython']:>10.3f}"
                  f"{row['speedup']:>8.1f}x{diff:>14.2e}")
    # end to end
    h = unit_square()
    t = {}
    for kname in ("numpy", "cython"):
        t[kname], est = best_of(lambda: ball_volume(h, [0.5, 0.5], 5.0, samples=10 * args.samples,
                                                    backend=kname), 1)
    print(f"ball_volume square R=5, {10 * args.samples} samples: numpy {t['numpy']:.2f} s, "
          f"cython {t['cython']:.2f} s ({t['numpy'] / t['cython']:.1f}x)")
    rows.append({"case": "square", "kernel": "ball_volume", "samples": 10 * args.samples,
                 "numpy_s": t["numpy"], "cython_s": t["cython"],
                 "speedup": t["numpy"] / t["cython"]})
    if args.json:
        with open(args.json, "w") as f:
            json.dump(rows, f, indent=2)


if __name__ == "__main__":
    main()
