"""Bernig's map to the dual space and empirical distortion measurements.

``Phi_b(x) = sum_i log(L_i(x)) g_i`` sends the interior of a polytope onto
R^n and is bi-Lipschitz from the Hilbert metric to any norm.  Nothing here
proves that; the functions measure the distortion band on stratified
near-boundary samples and check that it stays put as the samples move
closer to the boundary.

Near-boundary points are carried with their slacks, computed from the
sampling construction rather than from the rounded coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import InsufficientSamples, InvalidNeighborhood, NoPreimage, WrongDimension
from .metric import birkhoff_from_slacks, finsler_from_slacks
from .polytope import TOL, HRep, VRep, chord_params
from .volume import sphere_directions

DEPTHS = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
MIN_PAIRS = 100
MIN_DISTANCE = 1e-6


@dataclass(frozen=True)
class DualVector:
    """A linear functional on R^n, stored by its coordinates."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if not np.all(np.isfinite(c)):
            raise ValueError("dual vector coordinates must be finite")
        object.__setattr__(self, "coords", c)

    def __call__(self, v) -> float:
        return float(self.coords @ np.asarray(v, dtype=float))

    def norm(self) -> float:
        return float(np.linalg.norm(self.coords))


def bernig_from_slacks(G, L) -> np.ndarray:
    return np.log(L) @ G


def bernig_map(h: HRep, x) -> DualVector:
    """``Phi_b(x) = sum_i log(L_i(x)) grad L_i``."""
    return DualVector(bernig_from_slacks(h.gradients, h.require_interior(x, "x")))


def bernig_preimage(h: HRep, w, x0=None, tol: float = 1e-20, maxiter: int = 200) -> np.ndarray:
    """Solve ``Phi_b(x) = w`` by damped Newton on the convex potential.

    Raises
    ------
    NoPreimage
        If Newton stalls, which for reachable targets only happens when the
        preimage is closer to the boundary than float resolution allows.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (h.dim,):
        raise WrongDimension(f"target has shape {w.shape}, expected ({h.dim},)")
    x0 = h.interior_point if x0 is None else np.asarray(x0, dtype=float)
    h.require_interior(x0, "x0")
    X, it = _backend.kernels.bernig_inverse(np.ascontiguousarray(h.gradients),
                                            np.ascontiguousarray(h.offsets),
                                            np.ascontiguousarray(w[None, :]), x0, tol, maxiter)
    if it[0] >= maxiter:
        raise NoPreimage(f"Newton did not converge for target {w.tolist()}")
    return X[0]


# ---------------------------------------------------------------- sampling

def sample_at_depth(h: HRep, depth: float, count: int, rng, center=None):
    """Points whose smallest slack equals ``depth``.

    Each point lies on a random ray from ``center``; the position on the
    ray is solved in closed form from the slack interpolation
    ``L = sigma * L(o) + (1 - sigma) * L(b)``.

    Returns
    -------
    X : (count, n) points
    L : (count, N) slacks, exact up to rounding of the interpolation
    """
    o = h.interior_point if center is None else np.asarray(center, dtype=float)
    lo = h.require_interior(o, "center")
    if not 0 < depth < lo.min():
        raise ValueError(f"depth must lie in (0, {lo.min():.3g})")
    G = h.gradients
    U = rng.normal(size=(count, h.dim))
    U /= np.linalg.norm(U, axis=1)[:, None]
    _, tp = chord_params(G, lo, U)
    Lb = np.maximum(lo + tp[:, None] * (U @ G.T), 0.0)
    # smallest sigma at which every slack is back above depth
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = np.where(Lb < depth, (depth - Lb) / (lo - Lb), 0.0)
    sigma = cross.max(axis=1)
    L = sigma[:, None] * lo + (1 - sigma[:, None]) * Lb
    X = o + ((1 - sigma) * tp)[:, None] * U
    return X, L


def _log_uniform(rng, lo, hi, size):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))


# -------------------------------------------------------------- distortion

@dataclass(frozen=True)
class Stratum:
    depth: float
    count: int
    min_ratio: float
    max_ratio: float

    @property
    def spread(self) -> float:
        return self.max_ratio / self.min_ratio


@dataclass(frozen=True)
class DistortionReport:
    """Ratios ``|Phi(x) - Phi(y)| / d(x, y)`` over stratified pairs.

    ``strata`` hold per-depth bands; ``min_ratio``/``max_ratio`` are over all
    pairs, with the attaining pairs in ``min_witness``/``max_witness``.
    """

    sample_count: int
    min_ratio: float
    max_ratio: float
    min_witness: tuple
    max_witness: tuple
    strata: tuple
    seed: int = 0
    excluded: int = 0

    @property
    def spread(self) -> float:
        return self.max_ratio / self.min_ratio

    def cumulative_spread(self, depth: float) -> float:
        """Spread of the band over the strata no deeper than ``depth``."""
        ss = [s for s in self.strata if s.depth >= depth * (1 - 1e-12)]
        return max(s.max_ratio for s in ss) / min(s.min_ratio for s in ss)

    @property
    def passes(self) -> bool:
        """Finite band that does not grow over the last two decades of depth.

        Compares the band over all strata with the band over the strata
        down to a depth 100 times shallower than the deepest; a growth of
        more than 10% fails.
        """
        if not (np.isfinite(self.spread) and self.min_ratio > 0):
            return False
        deepest = min(s.depth for s in self.strata)
        shallow = [s.depth for s in self.strata if s.depth >= 100 * deepest * (1 - 1e-12)]
        if not shallow:
            return True
        return self.spread <= 1.1 * self.cumulative_spread(min(shallow))

    def rows(self):
        return [(s.depth, s.min_ratio, s.max_ratio) for s in self.strata]

    def to_json(self) -> dict:
        return {
            "sample_count": self.sample_count,
            "min_ratio": self.min_ratio,
            "max_ratio": self.max_ratio,
            "min_witness": [list(map(float, p)) for p in self.min_witness],
            "max_witness": [list(map(float, p)) for p in self.max_witness],
            "strata": [s.__dict__ for s in self.strata],
            "passes": self.passes,
            "seed": self.seed,
            "excluded": self.excluded,
        }


def _pair_ratios(G, Lx, Ly):
    d = birkhoff_from_slacks(Lx, Ly)
    e = np.linalg.norm((np.log(Lx) - np.log(Ly)) @ G, axis=1)
    keep = d >= MIN_DISTANCE
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(keep, e / d, np.nan), keep


def distortion_report(h: HRep, depths=DEPTHS, pairs: int = 500, seed: int = 0,
                      step: float = 0.05) -> DistortionReport:
    """Distortion band of Bernig's map over pairs stratified by depth.

    For every depth ``delta`` three kinds of pairs are drawn, ``pairs`` of
    each: both points at depth ``delta`` (far pairs), a point at depth
    ``delta`` and one at depth 0.1 (crossing pairs), and a point at depth
    ``delta`` with a neighbour at Hilbert distance about ``step`` (near
    pairs, where the ratio approaches the Finsler comparison constant).
    Pairs with ``d < 1e-6`` are dropped.
    """
    rng = np.random.default_rng(seed)
    G = h.gradients
    o = h.interior_point
    shallow = min(0.1, 0.5 * h.slacks(o).min())
    strata = []
    best = [np.inf, None]
    worst = [-np.inf, None]
    total = excluded = 0
    for depth in sorted(depths, reverse=True):
        X1, L1 = sample_at_depth(h, depth, 3 * pairs, rng)
        X2, L2 = sample_at_depth(h, depth, pairs, rng)
        X3, L3 = sample_at_depth(h, shallow, pairs, rng)
        V = rng.normal(size=(pairs, h.dim))
        F = finsler_from_slacks(G, L1[2 * pairs:], V)
        s = step / F
        X4 = X1[2 * pairs:] + s[:, None] * V
        L4 = L1[2 * pairs:] + s[:, None] * (V @ G.T)
        XA = X1
        LA = L1
        XB = np.vstack([X2, X3, X4])
        LB = np.vstack([L2, L3, L4])
        r, keep = _pair_ratios(G, LA, LB)
        excluded += int((~keep).sum())
        if keep.any():
            rk = r[keep]
            k_min = np.flatnonzero(keep)[np.argmin(rk)]
            k_max = np.flatnonzero(keep)[np.argmax(rk)]
            if r[k_min] < best[0]:
                best = [r[k_min], (XA[k_min], XB[k_min])]
            if r[k_max] > worst[0]:
                worst = [r[k_max], (XA[k_max], XB[k_max])]
            strata.append(Stratum(float(depth), int(keep.sum()), float(rk.min()), float(rk.max())))
        total += int(keep.sum())
    if total < MIN_PAIRS:
        raise InsufficientSamples(f"only {total} pairs with d >= {MIN_DISTANCE}")
    return DistortionReport(total, float(best[0]), float(worst[0]), best[1], worst[1],
                            tuple(strata), int(seed), excluded)


def interval_ratios(h: HRep, count: int = 1000, seed: int = 0) -> np.ndarray:
    """``|Phi(x) - Phi(y)| / d(x, y)`` on a 1-D polytope (exactly 2 in theory)."""
    if h.dim != 1:
        raise WrongDimension("interval_ratios needs a 1-D polytope")
    rng = np.random.default_rng(seed)
    V = np.sort(h.vertices[:, 0])
    X = rng.uniform(V[0], V[1], size=(count, 2))
    X = X[np.abs(X[:, 0] - X[:, 1]) > 1e-6 * (V[1] - V[0])]
    Lx = h.slacks(X[:, :1])
    Ly = h.slacks(X[:, 1:])
    r, keep = _pair_ratios(h.gradients, Lx, Ly)
    return r[keep]


# --------------------------------------------------------- Finsler compare

@dataclass(frozen=True)
class ComparisonReport:
    """Band of ``F_A(x, v) / F_B(x, v)`` per sampling depth."""

    depths: tuple
    bands: tuple            # (min, max) per depth
    shared_vertex: int      # simplex vertex opposite the shared face
    samples: int
    directions: int
    seed: int = 0

    @property
    def min_ratio(self) -> float:
        return min(b[0] for b in self.bands)

    @property
    def max_ratio(self) -> float:
        return max(b[1] for b in self.bands)

    def spread(self, k: int) -> float:
        lo, hi = self.bands[k]
        return hi / lo

    @property
    def widening(self) -> float:
        """Relative growth of the band spread from the first to the last depth."""
        return self.spread(-1) / self.spread(0) - 1

    def to_json(self) -> dict:
        return {"depths": list(self.depths), "bands": [list(b) for b in self.bands],
                "min_ratio": self.min_ratio, "max_ratio": self.max_ratio,
                "widening": self.widening, "samples": self.samples,
                "directions": self.directions, "seed": self.seed}


def _shared_face(hA: HRep, hB: HRep, S: np.ndarray, tol=1e-9) -> int:
    """Index of the simplex vertex whose opposite face lies on both boundaries."""
    n = S.shape[1]
    found = []
    for k in range(n + 1):
        face = np.delete(S, k, axis=0)
        on = []
        for h in (hA, hB):
            sl = face @ h.gradients.T + h.offsets          # (n, N)
            on.append(bool(np.any(np.all(np.abs(sl) <= tol, axis=0))))
        if all(on):
            found.append(k)
    if len(found) != 1:
        raise InvalidNeighborhood("the simplex needs exactly one face on both boundaries, "
                                  f"found {len(found)}")
    return found[0]


def finsler_comparison(hA: HRep, hB: HRep, shared_simplex, depths=(1e-3, 1e-6),
                       samples: int = 10000, directions: int = 360,
                       seed: int = 0) -> ComparisonReport:
    """Ratio band of the two Finsler norms on a shared simplex.

    Points are drawn in the simplex by barycentric weights: the weight of
    the vertex opposite the shared boundary face is log-uniform in
    ``[delta, 10 delta]`` and the others log-uniform in ``[delta, 1]``
    before normalization, so samples also crowd the lower faces.
    Slacks of both polytopes are affine in the weights and are evaluated
    from the weights directly.
    """
    S = shared_simplex.vertices if isinstance(shared_simplex, VRep) else np.asarray(shared_simplex, dtype=float)
    n = hA.dim
    if hB.dim != n or S.shape != (n + 1, n):
        raise WrongDimension("polytopes and simplex must share the dimension")
    for name, h in (("A", hA), ("B", hB)):
        if np.min(S @ h.gradients.T + h.offsets) < -TOL:
            raise InvalidNeighborhood(f"simplex is not contained in polytope {name}")
    k = _shared_face(hA, hB, S)
    rng = np.random.default_rng(seed)
    SA = S @ hA.gradients.T + hA.offsets          # (n+1, NA) slack per vertex
    SB = S @ hB.gradients.T + hB.offsets
    V = sphere_directions(n, directions, seed)
    bands = []
    for delta in depths:
        W = _log_uniform(rng, delta, 1.0, (samples, n + 1))
        wk = _log_uniform(rng, delta, 10 * delta, samples)
        W[:, k] = 0
        W *= ((1 - wk) / W.sum(axis=1))[:, None]
        W[:, k] = wk
        LA = W @ SA
        LB = W @ SB
        if np.min(LA) <= 0 or np.min(LB) <= 0:
            raise InvalidNeighborhood("simplex interior leaves one of the polytopes")
        FA = finsler_from_slacks(hA.gradients, LA[:, None, :], V[None, :, :])
        FB = finsler_from_slacks(hB.gradients, LB[:, None, :], V[None, :, :])
        r = FA / FB
        bands.append((float(r.min()), float(r.max())))
    return ComparisonReport(tuple(float(d) for d in depths), tuple(bands), k, int(samples),
                            len(V), int(seed))
