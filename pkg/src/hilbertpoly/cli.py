"""Command-line front end.

Exit codes: 0 on success, 1 on domain errors (the message names the violated
invariant) or a failed ``check``, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from . import _backend
from .bilipschitz import (bernig_map, bernig_preimage, distortion_report,
                          finsler_comparison)
from .embeddings import LogEmbedding, simplex_section_lift
from .errors import HilbertGeometryError
from .fileio import (csv_text, file_hash, header_fields, json_text, load_polytope,
                     svg_text, write_text)
from .metric import (distance_alexander, distance_birkhoff, distance_crossratio,
                     finsler_norm)
from .polytope import boundary_intersection, sample_interior
from .volume import (ball_boundary, ball_volume, growth_fit, ray_divergence_ratio)


def point(text: str) -> np.ndarray:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated point: {text!r}")
    if not vals or not np.all(np.isfinite(vals)):
        raise argparse.ArgumentTypeError(f"not a finite point: {text!r}")
    return np.array(vals)


def numbers(text: str) -> list[float]:
    return point(text).tolist()


def fmt_point(x) -> str:
    return ",".join(repr(float(v)) for v in np.atleast_1d(x))


def _emit(args, text: str, path) -> None:
    if path:
        write_text(path, text)


def _center(args, h):
    return h.interior_point if args.o is None else args.o


# ---------------------------------------------------------------- commands

def cmd_distance(args, h, fields):
    p, q = args.p, args.q
    d = distance_birkhoff(h, p, q)
    out = {"distance": d, "crossratio": distance_crossratio(h, p, q)}
    if h.dim == 2:
        out["alexander"] = distance_alexander(h, p, q)
    print(f"distance {d!r}")
    if np.linalg.norm(q - p) > 0:
        ch = boundary_intersection(h, p, q - p)
        print(f"a {fmt_point(ch.a)}")
        print(f"b {fmt_point(ch.b)}")
        out.update(a=ch.a, b=ch.b)
    _emit(args, json_text(fields, out), args.json)
    return 0


def cmd_finsler(args, h, fields):
    F = finsler_norm(h, args.p, args.v)
    print(f"finsler {F!r}")
    _emit(args, json_text(fields, {"p": args.p, "v": args.v, "finsler": F}), args.json)
    return 0


def cmd_ball(args, h, fields):
    o = _center(args, h)
    ball = ball_boundary(h, o, args.radius, args.directions, args.seed)
    print(f"boundary points {len(ball.points)}, max |d - R| "
          f"{np.abs(ball.distances() - args.radius).max():.3g}")
    if args.csv:
        rows = [tuple(p) + (t,) for p, t in zip(ball.points, ball.t)]
        cols = [f"x{i}" for i in range(h.dim)] + ["t"]
        write_text(args.csv, csv_text(fields, cols, rows))
    if args.svg:
        write_text(args.svg, svg_text(fields, h, [ball.points]))
    payload = {"center": o, "radius": args.radius}
    if args.volume:
        est = ball_volume(h, o, args.radius, args.measure, args.samples, args.seed)
        print(f"volume {float(est.estimate)!r} stderr {float(est.stderr)!r} ({est.measure})")
        payload["volume"] = est.to_json()
    _emit(args, json_text(fields, payload), args.json)
    return 0


def cmd_growth(args, h, fields):
    o = _center(args, h)

    def progress(e):
        print(f"R={e.radius:g} volume={e.estimate:.6g} stderr={e.stderr:.3g}", file=sys.stderr)

    fit = growth_fit(h, o, args.radii, args.measure, args.samples, args.seed,
                     progress=progress if args.verbose else None)
    print(f"slope {fit.slope!r} ci [{fit.slope_ci[0]!r}, {fit.slope_ci[1]!r}]")
    print(f"asvol {fit.asvol!r} plateau {fit.plateau}")
    if args.csv:
        write_text(args.csv, csv_text(fields, ["R", "volume", "stderr"], fit.rows()))
    _emit(args, json_text(fields, fit.to_json()), args.json)
    return 0


def cmd_embed(args, h, fields):
    emb = LogEmbedding(h)
    payload = emb.to_json()
    if args.p is not None:
        w = emb(args.p)
        print(fmt_point(w))
        payload["image"] = w
    else:
        print(f"target dimension {emb.target_dim}")
    _emit(args, json_text(fields, payload), args.json)
    return 0


def cmd_lift(args, h, fields):
    lift = simplex_section_lift(h)
    payload = lift.to_json()
    if args.p is not None:
        y = lift(args.p)
        print(fmt_point(y))
        payload["image"] = y
    else:
        print(f"lift R^{h.dim} -> simplex of dimension {lift.target_dim}")
    _emit(args, json_text(fields, payload), args.json)
    return 0


def cmd_bernig(args, h, fields):
    payload = {}
    if args.p is not None:
        phi = bernig_map(h, args.p).coords
        print(f"phi {fmt_point(phi)}")
        payload["phi"] = phi
    if args.invert is not None:
        x = bernig_preimage(h, args.invert)
        print(f"preimage {fmt_point(x)}")
        payload["preimage"] = x
    if args.distortion:
        rep = distortion_report(h, pairs=args.pairs, seed=args.seed)
        print(f"ratio band [{rep.min_ratio!r}, {rep.max_ratio!r}] over {rep.sample_count} pairs, "
              f"stable {rep.passes}")
        payload["distortion"] = rep.to_json()
        if args.csv:
            write_text(args.csv, csv_text(fields, ["depth", "minRatio", "maxRatio"], rep.rows()))
    _emit(args, json_text(fields, payload), args.json)
    return 0


def cmd_compare(args, h, fields):
    hb = load_polytope(args.b)
    with open(args.simplex, encoding="utf-8") as f:
        S = np.asarray(json.load(f)["vertices"], dtype=float)
    rep = finsler_comparison(h, hb, S, depths=args.depths, samples=args.samples, seed=args.seed)
    for d, (lo, hi) in zip(rep.depths, rep.bands):
        print(f"depth {d:g}: [{lo!r}, {hi!r}]")
    print(f"widening {rep.widening!r}")
    if args.csv:
        rows = [(d, lo, hi) for d, (lo, hi) in zip(rep.depths, rep.bands)]
        write_text(args.csv, csv_text(fields, ["depth", "minRatio", "maxRatio"], rows))
    _emit(args, json_text(fields, rep.to_json()), args.json)
    return 0


def cmd_raylimit(args, h, fields):
    o = _center(args, h)
    rows = []
    for t in args.t:
        r = ray_divergence_ratio(h, o, args.v1, args.v2, t)
        rows.append((t, r))
        print(f"t={t:g} ratio {r!r}")
    if args.csv:
        write_text(args.csv, csv_text(fields, ["t", "ratio"], rows))
    _emit(args, json_text(fields, {"rows": rows}), args.json)
    return 0


def run_checks(h, pairs: int, seed: int, tol: float = 1e-8):
    """Cross-validation table: (name, count, max deviation, tolerance)."""
    rng = np.random.default_rng(seed)
    P = sample_interior(h, pairs, rng)
    Q = sample_interior(h, pairs, rng)
    emb = LogEmbedding(h)
    dev = {"crossratio-birkhoff": 0.0, "embedding-birkhoff": 0.0}
    if h.dim == 2:
        dev["alexander-birkhoff"] = 0.0
    for p, q in zip(P, Q):
        d = distance_birkhoff(h, p, q)
        s = 1 + d
        dev["crossratio-birkhoff"] = max(dev["crossratio-birkhoff"],
                                         abs(distance_crossratio(h, p, q) - d) / s)
        dev["embedding-birkhoff"] = max(dev["embedding-birkhoff"], abs(emb.distance(p, q) - d) / s)
        if h.dim == 2:
            dev["alexander-birkhoff"] = max(dev["alexander-birkhoff"],
                                            abs(distance_alexander(h, p, q) - d) / s)
    rows = [(k, pairs, v, tol) for k, v in dev.items()]
    # Finsler norm as the infinitesimal distance; the truncation error is
    # about t * (|v| / L)^2 / 4, so stay in the central half with unit v
    t = 1e-6
    fdev = 0.0
    C = sample_interior(h, pairs, rng, shrink=0.5)
    V = rng.normal(size=(pairs, h.dim))
    V /= np.linalg.norm(V, axis=1)[:, None]
    for p, v in zip(C, V):
        fdev = max(fdev, abs(distance_birkhoff(h, p, p + t * v) / t - finsler_norm(h, p, v)))
    rows.append(("finsler-limit", pairs, fdev, 1e-4))
    return rows


def cmd_check(args, h, fields):
    rows = run_checks(h, args.pairs, args.seed)
    print(f"{'check':<22}{'pairs':>7}{'max_dev':>12}{'tol':>10}  status")
    bad = 0
    for name, n, d, tol in rows:
        ok = d <= tol
        bad += not ok
        print(f"{name:<22}{n:>7}{d:>12.3e}{tol:>10.0e}  {'ok' if ok else 'FAIL'}")
    if args.csv:
        write_text(args.csv, csv_text(fields, ["check", "pairs", "max_dev", "tol"], rows))
    _emit(args, json_text(fields, {"rows": rows, "failures": bad}), args.json)
    if bad:
        print(f"error: tolerance: {bad} check(s) exceeded tolerance", file=sys.stderr)
        return 1
    return 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hilbertpoly",
                                 description="Hilbert geometry of convex polytopes.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help, seed=True):
        p = sub.add_parser(name, help=help)
        p.add_argument("--in", dest="input", required=True, help="polytope JSON file")
        if seed:
            p.add_argument("--seed", type=int, default=0)
        p.add_argument("--json", help="write a JSON summary here")
        p.set_defaults(func=func)
        return p

    p = add("distance", cmd_distance, "Hilbert distance between two points", seed=False)
    p.add_argument("--p", type=point, required=True)
    p.add_argument("--q", type=point, required=True)

    p = add("finsler", cmd_finsler, "Finsler norm of a tangent vector", seed=False)
    p.add_argument("--p", type=point, required=True)
    p.add_argument("--v", type=point, required=True)

    p = add("ball", cmd_ball, "boundary of a metric ball, optionally its volume")
    p.add_argument("--o", type=point)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--directions", type=int, default=360)
    p.add_argument("--volume", action="store_true")
    p.add_argument("--measure", choices=["busemann", "holmes-thompson"], default="busemann")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--csv")
    p.add_argument("--svg")

    p = add("growth", cmd_growth, "volume growth exponent over a list of radii")
    p.add_argument("--o", type=point)
    p.add_argument("--radii", type=numbers, default=[1, 2, 3, 5, 7, 9, 12])
    p.add_argument("--measure", choices=["busemann", "holmes-thompson"], default="busemann")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--csv")
    p.add_argument("--verbose", action="store_true")

    p = add("embed", cmd_embed, "isometric log embedding", seed=False)
    p.add_argument("--p", type=point)

    p = add("lift", cmd_lift, "affine lift onto a simplex section", seed=False)
    p.add_argument("--p", type=point)

    p = add("bernig", cmd_bernig, "Bernig map, inverse and distortion band")
    p.add_argument("--p", type=point)
    p.add_argument("--invert", type=point)
    p.add_argument("--distortion", action="store_true")
    p.add_argument("--pairs", type=int, default=500)
    p.add_argument("--csv")

    p = add("compare", cmd_compare, "Finsler ratio band on a shared simplex")
    p.add_argument("--b", required=True, help="second polytope JSON file")
    p.add_argument("--simplex", required=True, help="JSON file with simplex 'vertices'")
    p.add_argument("--depths", type=numbers, default=[1e-3, 1e-6])
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--csv")

    p = add("raylimit", cmd_raylimit, "ray divergence ratio d(x(t), y(t)) / 2t", seed=False)
    p.add_argument("--o", type=point)
    p.add_argument("--v1", type=point, required=True)
    p.add_argument("--v2", type=point, required=True)
    p.add_argument("--t", type=numbers, default=[5, 10, 20, 40])
    p.add_argument("--csv")

    p = add("check", cmd_check, "cross-validate the distance formulas")
    p.add_argument("--pairs", type=int, default=500)
    p.add_argument("--csv")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    inputs = [args.input] + [getattr(args, k) for k in ("b", "simplex") if getattr(args, k, None)]
    try:
        h = load_polytope(args.input)
        fields = header_fields(getattr(args, "seed", None), file_hash(*inputs),
                               command=args.command, backend=_backend.NAME)
        return args.func(args, h, fields)
    except HilbertGeometryError as e:
        print(f"error: {e.invariant}: {e}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, KeyError) as e:
        print(f"error: input: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: domain: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
