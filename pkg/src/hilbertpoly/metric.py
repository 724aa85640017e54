"""Hilbert distance and Finsler norm on a polytope.

Three independent routes to the distance are provided:

* ``distance_crossratio`` casts the chord through the two points and takes
  half the log cross-ratio of the four collinear points;
* ``distance_birkhoff`` takes half the range of the facet log-ratios
  ``log(L_i(p) / L_i(q))``, which equals the sup over facet pairs;
* ``distance_alexander`` (polygons only) sums the vertex cone metrics.

They agree to rounding error and the test suite checks them against each
other.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PointOutside, WrongDimension
from .polytope import (TOL, AffineFunctional, HRep, VRep, chord_params,
                       hrep_from_vrep, polygon_order)


def birkhoff_from_slacks(sp, sq):
    """Half the range of ``log(sp_i / sq_i)`` over the last axis.

    Takes slack vectors rather than points so callers can feed values that
    are more accurate than the rounded coordinates would give (deep
    near-boundary work).
    """
    r = np.log(sp) - np.log(sq)
    return 0.5 * (r.max(axis=-1) - r.min(axis=-1))


def distance_birkhoff(h: HRep, p, q) -> float:
    """Hilbert distance as half the range of facet log-ratios (O(N))."""
    sp = h.require_interior(p, "p")
    sq = h.require_interior(q, "q")
    return float(birkhoff_from_slacks(sp, sq))


def distance_crossratio(h: HRep, p, q) -> float:
    """Hilbert distance ``1/2 log[a, p, q, b]`` from the chord through p, q.

    The four Euclidean lengths are obtained by ray casting from ``p`` and
    from ``q`` separately, so ``|q - b|`` never comes out of a cancellation.
    """
    sp = h.require_interior(p, "p")
    sq = h.require_interior(q, "q")
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    w = q - p
    dist = np.linalg.norm(w)
    if dist <= TOL * 1e-3:
        return 0.0
    u = w / dist
    pa, pb = chord_params(h.gradients, sp, u)
    qa, qb = chord_params(h.gradients, sq, u)
    # |q-a| = qa, |p-a| = pa, |p-b| = pb, |q-b| = qb
    val = 0.5 * ((np.log(qa) - np.log(pa)) + (np.log(pb) - np.log(qb)))
    return float(max(val, 0.0))


def finsler_from_slacks(G, s, v):
    """Finsler norm for slack vectors ``s`` (..., N) and vectors ``v`` (..., n).

    ``1/t_plus = max_i(-g_i.v / s_i)`` and ``1/t_minus = max_i(g_i.v / s_i)``
    for the unnormalized direction v, so no division by ``|v|`` is needed.
    """
    a = (np.asarray(v) @ G.T) / s
    return 0.5 * (a.max(axis=-1) + (-a).max(axis=-1))


def finsler_norm(h: HRep, p, v) -> float:
    """``F(p, v) = 1/2 |v| (1/|p - p_minus| + 1/|p - p_plus|)``; 0 for v = 0."""
    s = h.require_interior(p, "p")
    v = np.asarray(v, dtype=float)
    nv = np.linalg.norm(v)
    if nv == 0:
        return 0.0
    t_minus, t_plus = chord_params(h.gradients, s, v / nv)
    return float(0.5 * nv * (1.0 / t_minus + 1.0 / t_plus))


@dataclass(frozen=True)
class ConeSector:
    """Planar sector ``{L1 > 0, L2 > 0}`` bounded by two lines through an apex."""

    l1: AffineFunctional
    l2: AffineFunctional

    def __post_init__(self):
        if self.l1.gradient.shape != (2,) or self.l2.gradient.shape != (2,):
            raise WrongDimension("cone sectors are planar")
        g1, g2 = self.l1.gradient, self.l2.gradient
        if abs(g1[0] * g2[1] - g1[1] * g2[0]) <= 1e-12:
            raise ValueError("sector lines must not be parallel")

    @property
    def apex(self) -> np.ndarray:
        A = np.vstack([self.l1.gradient, self.l2.gradient])
        return np.linalg.solve(A, -np.array([self.l1.offset, self.l2.offset]))


def cone_metric(s: ConeSector, x, y) -> float:
    """Half the absolute log cross-ratio of the lines H1, (px), (py), H2."""
    vals = [s.l1(x), s.l2(x), s.l1(y), s.l2(y)]
    if min(vals) <= 0:
        raise PointOutside("point outside the cone sector")
    x1, x2, y1, y2 = vals
    return float(0.5 * abs((np.log(x1) - np.log(y1)) + (np.log(y2) - np.log(x2))))


def polygon_sectors(h: HRep) -> tuple[np.ndarray, list[ConeSector]]:
    """Vertices of a polygon in ccw order and the interior sector at each."""
    if h.dim != 2:
        raise WrongDimension("polygon sectors need a 2-D polytope")
    V = h.vertices[polygon_order(h.vertices)]
    active = np.abs(V @ h.gradients.T + h.offsets) <= 1e-7
    fs = h.functionals
    sectors = []
    for row in active:
        i, j = np.flatnonzero(row)[:2]
        sectors.append(ConeSector(fs[i], fs[j]))
    return V, sectors


def alexander_sums(v: VRep | HRep, x, y) -> tuple[float, float, float]:
    """Vertex cone-metric sums for a polygon.

    Returns
    -------
    (half_total, left, right)
        Half the sum over all vertices, and the sums over the vertices
        strictly left and strictly right of the oriented line from x to y.
        Each equals the Hilbert distance; vertices on the line contribute 0.
    """
    h = v if isinstance(v, HRep) else hrep_from_vrep(v)
    if h.dim != 2:
        raise WrongDimension("Alexander's formula is planar (got dim %d)" % h.dim)
    h.require_interior(x, "x")
    h.require_interior(y, "y")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    V, sectors = polygon_sectors(h)
    deltas = np.array([cone_metric(s, x, y) for s in sectors])
    d = y - x
    side = d[0] * (V[:, 1] - x[1]) - d[1] * (V[:, 0] - x[0])
    scale = max(np.linalg.norm(d), 1e-300) * TOL
    left = deltas[side > scale].sum()
    right = deltas[side < -scale].sum()
    return float(0.5 * deltas.sum()), float(left), float(right)


def distance_alexander(v: VRep | HRep, x, y, one_sided: bool = False) -> float:
    """Hilbert distance on a polygon as a sum of vertex cone metrics.

    With ``one_sided=True`` only the vertices strictly on the left of the
    line (xy) are summed, which already gives the distance.
    """
    half, left, _ = alexander_sums(v, x, y)
    return left if one_sided else half
