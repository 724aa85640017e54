"""Metric balls, Finsler ball volumes and growth-order fitting.

Points far out in a Hilbert ball sit within ``e^{-2R}`` of the boundary,
which is below the resolution of their coordinates once R is moderately
large.  Everything here therefore tracks facet slacks directly: a point on
the segment from ``o`` to a boundary point ``b`` is written as
``L(sigma) = sigma * L(o) + (1 - sigma) * L(b)`` with the facets active at
``b`` set to exactly zero, and bisection runs on ``log(sigma)``.

Ball volumes are estimated by Monte Carlo in Bernig coordinates
``y = sum_i log(L_i(x)) g_i``.  In those coordinates a Hilbert ball of
radius R has Euclidean size O(R) instead of needing samples within
``e^{-2R}`` of the boundary, so a uniform sampler on a Euclidean ball around
the image of ``o`` has bounded variance.  Samples are pulled back by Newton
and weighted by ``density(x) / det(dPhi(x))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gamma, pi

import numpy as np

from . import _backend
from ._fallback import BUSEMANN, HOLMES_THOMPSON, polar_volume_hull
from .errors import InsufficientSamples, InvalidVertex, PointOutside
from .metric import birkhoff_from_slacks, finsler_from_slacks
from .polytope import HRep, chord_params

MEASURES = {"busemann": BUSEMANN, "holmes-thompson": HOLMES_THOMPSON}
MIN_SAMPLES = 1000
BATCH = 1 << 15
_ACTIVE = 1e-12


def unit_ball_volume(n: int) -> float:
    return pi ** (n / 2) / gamma(n / 2 + 1)


def sphere_directions(n: int, k: int, seed: int = 0) -> np.ndarray:
    """``k`` unit vectors in R^n, spread evenly where that is cheap.

    Equally spaced angles in 2-D, a Fibonacci lattice in 3-D and seeded
    Gaussian directions otherwise.
    """
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        a = 2 * pi * (np.arange(k) + 0.5) / k
        return np.column_stack([np.cos(a), np.sin(a)])
    if n == 3:
        i = np.arange(k) + 0.5
        z = 1 - 2 * i / k
        phi = pi * (3 - np.sqrt(5)) * i
        r = np.sqrt(1 - z * z)
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    D = np.random.default_rng(seed).normal(size=(k, n))
    return D / np.linalg.norm(D, axis=1)[:, None]


def _measure_code(measure) -> int:
    try:
        return MEASURES[str(measure).lower().replace("_", "-")]
    except KeyError:
        raise ValueError(f"unknown measure {measure!r}; use one of {sorted(MEASURES)}")


# ---------------------------------------------------------------- segments

def _endpoint_slacks(h: HRep, lo, target):
    """Slacks at a boundary point, with its active facets set to exactly 0."""
    Lb = np.asarray(target, dtype=float) @ h.gradients.T + h.offsets
    Lb = np.where(np.abs(Lb) <= _ACTIVE * (1 + np.abs(lo)), 0.0, Lb)
    return np.maximum(Lb, 0.0)


def _solve_log_sigma(lo, Lb, R, iters=110):
    """Bisection for ``log(sigma)`` with ``d(o, L(sigma)) = R`` per row of Lb.

    ``d`` is strictly decreasing in ``sigma`` along a segment from an
    interior point to the boundary, so the root is unique.
    """
    Lb = np.atleast_2d(Lb)
    R = np.broadcast_to(np.asarray(R, dtype=float), (len(Lb),))

    def dist(ls):
        s = np.exp(ls)[:, None]
        return birkhoff_from_slacks(lo, s * lo + (1 - s) * Lb)

    lo_b = -2.0 * R - 10.0
    for _ in range(60):
        short = dist(lo_b) < R
        if not short.any():
            break
        lo_b = np.where(short, 2 * lo_b, lo_b)
    hi_b = np.zeros(len(Lb))
    for _ in range(iters):
        mid = 0.5 * (lo_b + hi_b)
        far = dist(mid) > R
        lo_b = np.where(far, mid, lo_b)
        hi_b = np.where(far, hi_b, mid)
        if np.all(hi_b - lo_b <= 1e-15 * (1 + np.abs(lo_b))):
            break
    ls = 0.5 * (lo_b + hi_b)
    s = np.exp(ls)[:, None]
    return ls, s * lo + (1 - s) * Lb


@dataclass(frozen=True)
class BallApprox:
    """Boundary samples of a Hilbert ball ``B(o, R)``.

    ``slacks`` are the facet values at the boundary points computed along the
    segment, which stay accurate when the points themselves round to the
    polytope boundary.
    """

    center: np.ndarray
    radius: float
    directions: np.ndarray
    t: np.ndarray
    points: np.ndarray
    slacks: np.ndarray = field(repr=False)
    center_slacks: np.ndarray = field(repr=False)

    def distances(self) -> np.ndarray:
        """``d(o, point)`` per sample, from the tracked slacks."""
        return birkhoff_from_slacks(self.center_slacks, self.slacks)

    def contains(self, h: HRep, x) -> bool:
        """Membership of x in the closed ball (from coordinates)."""
        s = h.slacks(np.asarray(x, dtype=float))
        if np.min(s) <= 0:
            return False
        return bool(birkhoff_from_slacks(self.center_slacks, s) <= self.radius)


def ball_boundary(h: HRep, o, R: float, directions=360, seed: int = 0) -> BallApprox:
    """Points at Hilbert distance R from ``o``, one per direction.

    Parameters
    ----------
    directions : int or array (K, n)
        A count (spread by :func:`sphere_directions`) or explicit vectors.
    """
    lo = h.require_interior(o, "o")
    if not R > 0:
        raise ValueError("radius must be positive")
    o = np.asarray(o, dtype=float)
    U = np.asarray(directions, dtype=float)
    if U.ndim == 0:
        U = sphere_directions(h.dim, int(directions), seed)
    U = U / np.linalg.norm(U, axis=1)[:, None]
    _, t_plus = chord_params(h.gradients, lo, U)
    B = o + t_plus[:, None] * U
    Lb = np.array([_endpoint_slacks(h, lo, b) for b in B])
    ls, L = _solve_log_sigma(lo, Lb, R)
    t = -np.expm1(ls) * t_plus
    return BallApprox(o, float(R), U, t, o + t[:, None] * U, L, lo)


# ------------------------------------------------------------------- rays

def _vertex_index(h: HRep, v) -> int:
    V = h.vertices
    v = np.asarray(v, dtype=float)
    if v.shape != (h.dim,):
        raise InvalidVertex(f"vertex has shape {v.shape}, expected ({h.dim},)")
    err = np.linalg.norm(V - v, axis=1)
    k = int(np.argmin(err))
    if err[k] > 1e-7 * (1 + np.linalg.norm(v)):
        raise InvalidVertex(f"{v.tolist()} is not a vertex of the polytope")
    return k


def unit_speed_slacks(h: HRep, o, target, t) -> np.ndarray:
    """Slacks of the point at Hilbert arclength ``t`` from o toward ``target``.

    ``target`` is a boundary point (typically a vertex).  ``t`` may be an
    array; the result then has one row per value.
    """
    lo = h.require_interior(o, "o")
    Lb = _endpoint_slacks(h, lo, target)
    if np.min(Lb) > _ACTIVE:
        raise PointOutside("ray target must lie on the boundary")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    _, L = _solve_log_sigma(lo, np.tile(Lb, (len(t), 1)), t)
    return L


def ray_divergence_ratio(h: HRep, o, vertex1, vertex2, t) -> float:
    """``d(x(t), y(t)) / (2t)`` for unit-speed rays from o to two vertices."""
    h.require_interior(o, "o")
    k1 = _vertex_index(h, vertex1)
    k2 = _vertex_index(h, vertex2)
    if not t > 0:
        raise ValueError("t must be positive")
    if k1 == k2:
        return 0.0
    V = h.vertices
    Lx = unit_speed_slacks(h, o, V[k1], t)[0]
    Ly = unit_speed_slacks(h, o, V[k2], t)[0]
    return float(birkhoff_from_slacks(Lx, Ly) / (2 * t))


# ---------------------------------------------------------------- volumes

@dataclass(frozen=True)
class VolumeEstimate:
    estimate: float
    stderr: float
    radius: float
    measure: str
    samples: int
    accepted: int
    seed: int
    sampler: str
    backend: str
    unresolved: int = 0
    rho: float = 0.0

    def __iter__(self):
        yield self.estimate
        yield self.stderr

    def to_json(self) -> dict:
        return dict(self.__dict__)


def tangent_ball_volume(h: HRep, x, polar: bool = False, directions=None,
                        exact: bool = True) -> float:
    """Euclidean volume of ``{v : F(x, v) <= 1}`` or of its polar body.

    In 2-D the exact polygon area is used unless ``exact=False``.  In higher
    dimension the ball volume comes from whitened direction quadrature and
    the polar volume from the exact difference-body hull (``exact=True``) or
    from quadrature.
    """
    h.require_interior(x, "x")
    G, c = h.gradients, h.offsets
    X = np.asarray(x, dtype=float)[None, :]
    kern = _backend.kernels
    if h.dim == 2 and exact:
        return float(kern.tangent_volume_2d(G, c, X, np.ascontiguousarray(h.vertices), polar)[0])
    if polar and exact:
        return float(polar_volume_hull(G, c, X)[0])
    if directions is None:
        directions = 720 if h.dim == 2 else 2000
    D = np.asarray(directions, dtype=float)
    if D.ndim == 0:
        D = sphere_directions(h.dim, int(directions))
    return float(kern.tangent_volume_quadrature(G, c, X, np.ascontiguousarray(D), polar)[0])


def density(h: HRep, x, measure="busemann") -> float:
    """Busemann or Holmes-Thompson density at x (w.r.t. Lebesgue measure)."""
    code = _measure_code(measure)
    omega = unit_ball_volume(h.dim)
    if code == BUSEMANN:
        return omega / tangent_ball_volume(h, x)
    return tangent_ball_volume(h, x, polar=True) / omega


def bernig_radius(h: HRep, o, R, directions=None, seed: int = 0) -> float:
    """Max ``|Phi_b(x) - Phi_b(o)|`` over the boundary of B(o, R).

    The image of the ball is spiky toward the vertices (there ``n`` slacks
    vanish together), so the search starts from spread directions plus the
    vertex directions and then hill-climbs around the best few with
    shrinking random perturbations.
    """
    if directions is None:
        directions = {1: 2, 2: 720, 3: 2000}.get(h.dim, 4000)
    o = np.asarray(o, dtype=float)
    lo = h.require_interior(o, "o")
    D = np.vstack([sphere_directions(h.dim, int(directions), seed), h.vertices - o])

    def reach(D):
        ball = ball_boundary(h, o, R, D)
        return np.linalg.norm((np.log(ball.slacks) - np.log(lo)) @ h.gradients, axis=1)

    v = reach(D)
    best = v.max()
    top = D[np.argsort(v)[-8:]]
    rng = np.random.default_rng(seed)
    for scale in (0.1, 0.03, 0.01, 0.003, 0.001):
        P = top[:, None, :] / np.linalg.norm(top, axis=1)[:, None, None]
        P = (P + scale * rng.normal(size=(len(top), 32, h.dim))).reshape(-1, h.dim)
        P = np.vstack([top, P])
        pv = reach(P)
        top = P[np.argsort(pv)[-8:]]
        best = max(best, pv.max())
    return float(best)


def _child_seeds(seed, count):
    return np.random.SeedSequence(seed).spawn(count)


def _uniform_ball(rng, m, n):
    Z = rng.normal(size=(m, n))
    Z /= np.linalg.norm(Z, axis=1)[:, None]
    return Z * rng.random(m)[:, None] ** (1.0 / n)


def ball_volume(h: HRep, o, R: float, measure="busemann", samples: int = 100_000,
                seed: int = 0, backend=None, sampler: str = "bernig",
                directions=None, margin: float = 1.05) -> VolumeEstimate:
    """Monte Carlo estimate of the Busemann or Holmes-Thompson volume of B(o, R).

    Parameters
    ----------
    sampler : {"bernig", "box"}
        ``"bernig"`` samples uniformly on a Euclidean ball in Bernig
        coordinates (default, bounded variance at any R).  ``"box"`` samples
        the Euclidean bounding box of the ball, which is only usable for
        small R and serves as a cross-check.
    directions : int, optional
        Quadrature size for tangent-ball volumes when n >= 3.

    Returns
    -------
    VolumeEstimate
        Unpacks as ``(estimate, stderr)``.
    """
    lo = h.require_interior(o, "o")
    o = np.asarray(o, dtype=float)
    code = _measure_code(measure)
    if samples < MIN_SAMPLES:
        raise InsufficientSamples(f"need at least {MIN_SAMPLES} samples, got {samples}")
    if not R > 0:
        raise ValueError("radius must be positive")
    kern = _backend.get(backend)
    n = h.dim
    G = np.ascontiguousarray(h.gradients)
    c = np.ascontiguousarray(h.offsets)
    verts = np.ascontiguousarray(h.vertices)
    if directions is None:
        directions = 2000 if n == 3 else 4000
    dirs = np.ascontiguousarray(sphere_directions(n, int(directions), seed))
    name = "cython" if kern is _backend.compiled else "numpy"
    if sampler == "box":
        return _box_volume(h, o, lo, R, code, samples, seed, kern, verts, dirs, name)
    if sampler != "bernig":
        raise ValueError(f"unknown sampler {sampler!r}")

    y0 = np.log(lo) @ G
    rho = margin * bernig_radius(h, o, R)
    while True:
        total = 0.0
        total2 = 0.0
        accepted = 0
        unresolved = 0
        far = 0.0
        nb = -(-samples // BATCH)
        for b, ss in enumerate(_child_seeds(seed, nb)):
            m = min(BATCH, samples - b * BATCH)
            U = _uniform_ball(np.random.default_rng(ss), m, n)
            Y = np.ascontiguousarray(y0 + rho * U)
            w, inside, iters = kern.mc_ball_weights(G, c, lo, float(R), Y, o, verts, dirs, code)
            total += w.sum()
            total2 += np.square(w).sum()
            accepted += int(inside.sum())
            unresolved += int(np.sum(inside & (iters >= 200)))
            if inside.any():
                far = max(far, float(np.linalg.norm(U[inside], axis=1).max()))
        # accepted samples near the sampling sphere mean the image of the
        # ball may poke out of it; widen and redo
        if far < 0.995 or margin > 4:
            break
        margin *= 1.5
        rho *= 1.5
    vb = unit_ball_volume(n) * rho ** n
    mean = total / samples
    var = max(total2 / samples - mean * mean, 0.0)
    return VolumeEstimate(vb * mean, vb * np.sqrt(var / samples), float(R),
                          _measure_name(code), int(samples), accepted, int(seed),
                          "bernig", name, unresolved, float(rho))


def _measure_name(code):
    return "busemann" if code == BUSEMANN else "holmes-thompson"


def _box_volume(h, o, lo, R, code, samples, seed, kern, verts, dirs, name):
    n = h.dim
    G, c = h.gradients, h.offsets
    ball = ball_boundary(h, o, R, {1: 2, 2: 720, 3: 2000}.get(n, 4000))
    lo_box = ball.points.min(axis=0)
    hi_box = ball.points.max(axis=0)
    pad = 0.02 * (hi_box - lo_box)
    lo_box, hi_box = lo_box - pad, hi_box + pad
    box_vol = float(np.prod(hi_box - lo_box))
    omega = unit_ball_volume(n)
    total = total2 = 0.0
    accepted = 0
    nb = -(-samples // BATCH)
    for b, ss in enumerate(_child_seeds(seed, nb)):
        m = min(BATCH, samples - b * BATCH)
        X = lo_box + (hi_box - lo_box) * np.random.default_rng(ss).random((m, n))
        L = X @ G.T + c
        ok = np.all(L > 0, axis=1)
        ok[ok] = kern.birkhoff_to(lo, np.ascontiguousarray(L[ok])) <= R
        w = np.zeros(m)
        if ok.any():
            Xi = np.ascontiguousarray(X[ok])
            if n == 2:
                vol = kern.tangent_volume_2d(G, c, Xi, verts, code == HOLMES_THOMPSON)
            elif code == HOLMES_THOMPSON:
                vol = polar_volume_hull(G, c, Xi)
            else:
                vol = kern.tangent_volume_quadrature(G, c, Xi, dirs, False)
            w[ok] = omega / vol if code == BUSEMANN else vol / omega
        total += w.sum()
        total2 += np.square(w).sum()
        accepted += int(ok.sum())
    mean = total / samples
    var = max(total2 / samples - mean * mean, 0.0)
    return VolumeEstimate(box_vol * mean, box_vol * np.sqrt(var / samples), float(R),
                          _measure_name(code), int(samples), accepted, int(seed),
                          "box", name, 0)


# ------------------------------------------------------------ growth fit

@dataclass(frozen=True)
class GrowthFit:
    radii: np.ndarray
    volumes: np.ndarray
    stderrs: np.ndarray
    slope: float
    slope_ci: tuple
    window: np.ndarray
    asvol: float
    asvol_window: np.ndarray
    dim: int
    measure: str
    samples: int
    seed: int

    @property
    def plateau(self) -> bool:
        """Last two asvol window values within 15% of each other."""
        a, b = self.asvol_window[-2:]
        return bool(abs(b - a) <= 0.15 * abs(a))

    def rows(self):
        return list(zip(self.radii.tolist(), self.volumes.tolist(), self.stderrs.tolist()))

    def to_json(self) -> dict:
        return {"dim": self.dim, "measure": self.measure, "samples": self.samples,
                "seed": self.seed, "slope": self.slope, "slope_ci": list(self.slope_ci),
                "window": self.window.tolist(), "asvol": self.asvol,
                "asvol_window": self.asvol_window.tolist(), "plateau": self.plateau}


def fit_window(radii) -> np.ndarray:
    """Indices of the top half of the radii in log space."""
    lr = np.log(np.asarray(radii, dtype=float))
    return np.flatnonzero(lr >= 0.5 * (lr[0] + lr[-1]) - 1e-12)


def fit_slope(radii, volumes, stderrs):
    """Weighted least squares of log V on log R.

    Returns ``(slope, half_width)`` with a 95% normal half-width from the
    MC standard errors.
    """
    x = np.log(radii)
    y = np.log(volumes)
    s = np.maximum(np.asarray(stderrs) / np.asarray(volumes), 1e-12)
    w = 1 / s ** 2
    xm = np.sum(w * x) / np.sum(w)
    sxx = np.sum(w * (x - xm) ** 2)
    slope = np.sum(w * (x - xm) * y) / sxx
    return float(slope), float(1.96 / np.sqrt(sxx))


def growth_fit(h: HRep, o, radii, measure="busemann", samples: int = 100_000,
               seed: int = 0, backend=None, progress=None) -> GrowthFit:
    """Ball volumes over ``radii`` and the growth exponent fitted over the top half.

    Every radius uses the same seed, so the estimates are coupled and the
    fitted slope is much less noisy than independent runs would give.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or len(radii) < 3 or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be a strictly increasing list of at least 3 values")
    est = []
    for R in radii:
        e = ball_volume(h, o, R, measure, samples, seed, backend)
        est.append(e)
        if progress is not None:
            progress(e)
    V = np.array([e.estimate for e in est])
    S = np.array([e.stderr for e in est])
    win = fit_window(radii)
    slope, hw = fit_slope(radii[win], V[win], S[win])
    n = h.dim
    asv = V[win] / radii[win] ** n
    return GrowthFit(radii, V, S, slope, (slope - hw, slope + hw), radii[win],
                     float(asv[-1]), asv, n, _measure_name(_measure_code(measure)),
                     int(samples), int(seed))
