"""Convex polytopes in halfspace and vertex form.

Halfspace form stores affine functionals ``L_i(x) = g_i . x + c_i`` that are
positive on the interior.  Functionals are normalized to unit gradient on
construction, so a slack value ``L_i(x)`` is the Euclidean distance from
``x`` to the i-th facet hyperplane and the single tolerance :data:`TOL` has
a geometric meaning.

Conversions between the two forms are brute force over n-subsets, which is
fine for the desk-scale polytopes used here (N up to a few dozen).  The cost
is ``O(C(N, n) * N)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import (DegenerateInput, EmptyInterior, PointOutside,
                     UnboundedPolytope, WrongDimension, ZeroDirection)

#: tolerance on (unit-gradient) functional values
TOL = 1e-9


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AffineFunctional:
    """Affine map ``x -> gradient . x + offset``."""

    gradient: np.ndarray
    offset: float

    def __post_init__(self):
        g = _frozen(np.atleast_1d(self.gradient))
        if g.ndim != 1 or not np.all(np.isfinite(g)) or not np.any(g):
            raise DegenerateInput("functional gradient must be a finite nonzero vector")
        object.__setattr__(self, "gradient", g)
        object.__setattr__(self, "offset", float(self.offset))

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.gradient + self.offset

    def normalized(self) -> "AffineFunctional":
        s = np.linalg.norm(self.gradient)
        return AffineFunctional(self.gradient / s, self.offset / s)


class HRep:
    """Bounded polytope ``{x : G x + c > 0}`` with unit-norm rows of ``G``.

    Parameters
    ----------
    gradients : array_like, shape (N, n)
    offsets : array_like, shape (N,)
    prune : bool
        Drop halfspaces that do not support a facet.  Defaults to True.

    Raises
    ------
    UnboundedPolytope
        If the intersection has a recession direction.
    EmptyInterior
        If no point satisfies every inequality strictly.
    """

    def __init__(self, gradients, offsets, prune: bool = True):
        G = np.array(gradients, dtype=float)
        c = np.array(offsets, dtype=float).reshape(-1)
        if G.ndim == 1:
            G = G.reshape(-1, 1)
        if G.ndim != 2 or G.shape[0] != c.shape[0]:
            raise DegenerateInput("gradients must be (N, n) and offsets (N,)")
        if not (np.all(np.isfinite(G)) and np.all(np.isfinite(c))):
            raise DegenerateInput("non-finite halfspace data")
        norms = np.linalg.norm(G, axis=1)
        if np.any(norms == 0):
            raise DegenerateInput("zero gradient in halfspace list")
        G = G / norms[:, None]
        c = c / norms
        G, c = _dedupe(G, c)
        n = G.shape[1]
        if G.shape[0] < n + 1 or not _positively_spanning(G):
            raise UnboundedPolytope("halfspaces do not bound a polytope")
        center, radius = _chebyshev(G, c)
        if radius <= TOL:
            raise EmptyInterior("interior is empty (Chebyshev radius %.3g)" % radius)
        if prune:
            keep = _irredundant(G, c)
            G, c = G[keep], c[keep]
        self._G = _frozen(G)
        self._c = _frozen(c)
        self._center = _frozen(center)
        self._radius = float(radius)
        self._vertices = None

    @classmethod
    def from_functionals(cls, functionals: Iterable[AffineFunctional], **kw) -> "HRep":
        fs = list(functionals)
        return cls([f.gradient for f in fs], [f.offset for f in fs], **kw)

    @property
    def dim(self) -> int:
        return self._G.shape[1]

    @property
    def n_facets(self) -> int:
        return self._G.shape[0]

    @property
    def gradients(self) -> np.ndarray:
        return self._G

    @property
    def offsets(self) -> np.ndarray:
        return self._c

    @property
    def functionals(self) -> list[AffineFunctional]:
        return [AffineFunctional(g, o) for g, o in zip(self._G, self._c)]

    @property
    def interior_point(self) -> np.ndarray:
        """Chebyshev center; the witness of a non-empty interior."""
        return self._center

    @property
    def inradius(self) -> float:
        return self._radius

    def slacks(self, x) -> np.ndarray:
        """Functional values at a point or at a stack of points (last axis n)."""
        return np.asarray(x, dtype=float) @ self._G.T + self._c

    def contains(self, x, tol: float = TOL) -> bool:
        """Strict interior membership."""
        return bool(np.min(self.slacks(x)) > tol)

    def require_interior(self, x, name: str = "point") -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise WrongDimension(f"{name} has shape {x.shape}, expected ({self.dim},)")
        if not np.all(np.isfinite(x)):
            raise PointOutside(f"{name} has non-finite coordinates")
        s = self.slacks(x)
        if np.min(s) <= TOL:
            raise PointOutside(f"{name} {x.tolist()} is not strictly interior "
                               f"(min slack {np.min(s):.3g})")
        return s

    @property
    def vertices(self) -> np.ndarray:
        if self._vertices is None:
            self._vertices = _frozen(_enumerate_vertices(self._G, self._c))
        return self._vertices

    def __repr__(self):
        return f"HRep(dim={self.dim}, n_facets={self.n_facets})"

    def to_json(self) -> dict:
        return {"dim": self.dim,
                "halfspaces": [{"gradient": g.tolist(), "offset": float(o)}
                               for g, o in zip(self._G, self._c)]}


@dataclass(frozen=True)
class VRep:
    """Polytope given by a list of points whose convex hull it is."""

    vertices: np.ndarray
    dim: int = field(default=-1)

    def __post_init__(self):
        V = np.array(self.vertices, dtype=float)
        if V.ndim == 1:
            V = V.reshape(-1, 1)
        if V.ndim != 2 or V.shape[0] == 0:
            raise DegenerateInput("vertices must be a non-empty (m, n) array")
        if not np.all(np.isfinite(V)):
            raise DegenerateInput("non-finite vertex coordinates")
        if self.dim not in (-1, V.shape[1]):
            raise WrongDimension(f"declared dim {self.dim} but vertices are {V.shape[1]}-D")
        object.__setattr__(self, "vertices", _frozen(V))
        object.__setattr__(self, "dim", V.shape[1])

    def to_json(self) -> dict:
        return {"dim": self.dim, "vertices": self.vertices.tolist()}


@dataclass(frozen=True)
class Chord:
    """Boundary endpoints of the line through ``p`` with unit direction ``u``.

    ``a = p - t_minus * u`` and ``b = p + t_plus * u``.
    """

    p: np.ndarray
    u: np.ndarray
    t_minus: float
    t_plus: float

    @property
    def a(self) -> np.ndarray:
        return self.p - self.t_minus * self.u

    @property
    def b(self) -> np.ndarray:
        return self.p + self.t_plus * self.u


@dataclass(frozen=True)
class Face:
    """Closed face stored by vertex indices; the face itself is the relative
    interior of their hull."""

    dim: int
    vertices: tuple[int, ...]
    facets: tuple[int, ...]


@dataclass(frozen=True)
class FaceLattice:
    faces: tuple[Face, ...]
    dim: int

    def f_vector(self) -> list[int]:
        counts = [0] * (self.dim + 1)
        for f in self.faces:
            counts[f.dim] += 1
        return counts

    def of_dim(self, k: int) -> list[Face]:
        return [f for f in self.faces if f.dim == k]

    def euler_characteristic(self) -> int:
        """Alternating sum over proper faces; equals ``1 - (-1)**n``."""
        fv = self.f_vector()
        return sum((-1) ** k * fv[k] for k in range(self.dim))


# --- internals --------------------------------------------------------------


def _dedupe(G, c, tol=TOL):
    keep = []
    for i in range(G.shape[0]):
        if not any(np.max(np.abs(G[i] - G[j])) <= tol and abs(c[i] - c[j]) <= tol
                   for j in keep):
            keep.append(i)
    return G[keep], c[keep]


def _positively_spanning(G) -> bool:
    # bounded iff rank n and some strictly positive lambda has G^T lambda = 0
    N, n = G.shape
    if np.linalg.matrix_rank(G) < n:
        return False
    res = linprog(np.zeros(N), A_eq=G.T, b_eq=np.zeros(n),
                  bounds=[(1.0, None)] * N, method="highs")
    return res.status == 0


def _chebyshev(G, c):
    N, n = G.shape
    # maximize r subject to G x + c >= r
    A = np.hstack([-G, np.ones((N, 1))])
    cost = np.zeros(n + 1)
    cost[-1] = -1.0
    res = linprog(cost, A_ub=A, b_ub=c, bounds=[(None, None)] * n + [(None, None)],
                  method="highs")
    if res.status != 0:
        raise UnboundedPolytope("Chebyshev-center LP failed: " + res.message)
    return res.x[:n], res.x[n]


def _irredundant(G, c):
    # a facet is a halfspace whose active vertices span an (n-1)-flat
    V = _enumerate_vertices(G, c)
    n = G.shape[1]
    active = np.abs(V @ G.T + c) <= 1e-7
    return [j for j in range(G.shape[0])
            if active[:, j].sum() >= n and _affine_rank(V[active[:, j]]) == n - 1]


def _enumerate_vertices(G, c, tol=TOL):
    N, n = G.shape
    combos = np.array(list(itertools.combinations(range(N), n)), dtype=int)
    A = G[combos]                       # (C, n, n)
    b = -c[combos]                      # (C, n)
    dets = np.linalg.det(A)
    ok = np.abs(dets) > 1e-12
    A, b = A[ok], b[ok]
    if len(A) == 0:
        return np.zeros((0, n))
    X = np.linalg.solve(A, b[..., None])[..., 0]
    feas = np.min(X @ G.T + c, axis=1) >= -1e-7
    X = X[feas]
    # drop near-duplicates (degenerate vertices solve several n-subsets)
    keep = np.ones(len(X), dtype=bool)
    for i in range(len(X)):
        if keep[i]:
            close = np.max(np.abs(X[i + 1:] - X[i]), axis=1) <= 1e-7
            keep[i + 1:] &= ~close
    return X[keep].reshape(-1, n)


def _affine_rank(P) -> int:
    P = np.asarray(P, dtype=float)
    if len(P) <= 1:
        return 0
    D = P[1:] - P[0]
    scale = max(1.0, float(np.max(np.abs(P))))
    return int(np.linalg.matrix_rank(D, tol=1e-9 * scale))


# --- operations -------------------------------------------------------------


def hrep_from_vrep(v: VRep) -> HRep:
    """Facet description of the convex hull of ``v.vertices``.

    Non-extremal input points are tolerated: every facet hyperplane passes
    through ``n`` affinely independent hull points, so scanning all n-subsets
    of the input finds it.

    Raises
    ------
    DegenerateInput
        If the points do not affinely span the ambient space.
    """
    V = v.vertices
    m, n = V.shape
    if m < n + 1 or _affine_rank(V) < n:
        raise DegenerateInput("vertices do not affinely span R^%d" % n)
    scale = max(1.0, float(np.max(np.abs(V))))
    grads, offs = [], []
    for idx in itertools.combinations(range(m), n):
        P = V[list(idx)]
        if n == 1:
            g = np.array([1.0])
        else:
            D = P[1:] - P[0]
            _, s, vt = np.linalg.svd(D, full_matrices=True)
            if s[-1] <= 1e-10 * scale:
                continue
            g = vt[-1]
        o = -g @ P[0]
        vals = V @ g + o
        lo, hi = vals.min(), vals.max()
        if lo >= -1e-9 * scale:
            pass
        elif hi <= 1e-9 * scale:
            g, o = -g, -o
        else:
            continue
        grads.append(g)
        offs.append(o)
    return HRep(np.array(grads), np.array(offs))


def vrep_from_hrep(h: HRep) -> VRep:
    """Vertices of ``h``: points where n independent facets vanish and all
    others are non-negative."""
    return VRep(h.vertices.copy())


def boundary_intersection(h: HRep, p, u) -> Chord:
    """Closed-form chord through ``p`` along ``u``.

    Raises
    ------
    PointOutside
        If ``p`` is not strictly interior.
    ZeroDirection
        If ``u`` is the zero vector.
    """
    s = h.require_interior(p, "p")
    u = np.asarray(u, dtype=float)
    nu = np.linalg.norm(u)
    if not nu > 0:
        raise ZeroDirection("direction must be nonzero")
    u = u / nu
    t_minus, t_plus = chord_params(h.gradients, s, u)
    return Chord(np.asarray(p, dtype=float), u, t_minus, t_plus)


def chord_params(G, slack, u):
    """``(t_minus, t_plus)`` for a point with given slacks along direction u.

    Works on stacks: ``slack`` (..., N) and ``u`` (..., n).
    """
    rate = np.asarray(u) @ G.T           # d/dt of each slack
    with np.errstate(divide="ignore", invalid="ignore"):
        fwd = np.where(rate < 0, slack / -rate, np.inf)
        bwd = np.where(rate > 0, slack / rate, np.inf)
    return bwd.min(axis=-1), fwd.min(axis=-1)


def face_lattice(h: HRep) -> FaceLattice:
    """All faces of ``h`` from the facet-vertex incidences.

    Every face is an intersection of facets, so closing the family of facet
    vertex sets under pairwise intersection yields the lattice.
    """
    V = h.vertices
    n = h.dim
    active = np.abs(V @ h.gradients.T + h.offsets) <= 1e-7   # (nv, N)
    sets = {frozenset(np.flatnonzero(active[:, j]).tolist()) for j in range(h.n_facets)}
    sets.discard(frozenset())
    frontier = set(sets)
    while frontier:
        new = set()
        for a in frontier:
            for b in sets:
                inter = a & b
                if inter and inter not in sets:
                    new.add(inter)
        sets |= new
        frontier = new
    faces = []
    for s in sets:
        idx = tuple(sorted(s))
        k = _affine_rank(V[list(idx)])
        fac = tuple(int(j) for j in np.flatnonzero(active[list(idx)].all(axis=0)))
        faces.append(Face(k, idx, fac))
    faces.append(Face(n, tuple(range(len(V))), ()))
    faces.sort(key=lambda f: (f.dim, f.vertices))
    return FaceLattice(tuple(faces), n)


# --- stock shapes -----------------------------------------------------------


def box(lo: Sequence[float], hi: Sequence[float]) -> HRep:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = len(lo)
    eye = np.eye(n)
    return HRep(np.vstack([eye, -eye]), np.concatenate([-lo, hi]))


def unit_cube(n: int = 3) -> HRep:
    return box(np.zeros(n), np.ones(n))


def unit_square() -> HRep:
    return unit_cube(2)


def interval(a: float = -1.0, b: float = 1.0) -> HRep:
    return box([a], [b])


def standard_simplex(n: int) -> HRep:
    """``{x_i > 0, 1 - sum x > 0}``; the corner simplex in R^n."""
    return HRep(np.vstack([np.eye(n), -np.ones((1, n))]),
                np.concatenate([np.zeros(n), [1.0]]))


def regular_polygon(k: int, radius: float = 1.0, phase: float = 0.0) -> HRep:
    t = phase + 2 * np.pi * np.arange(k) / k
    return hrep_from_vrep(VRep(radius * np.column_stack([np.cos(t), np.sin(t)])))


def polygon_order(V) -> np.ndarray:
    """Counter-clockwise ordering of 2-D vertices around their centroid."""
    V = np.asarray(V, dtype=float)
    c = V.mean(axis=0)
    return np.argsort(np.arctan2(V[:, 1] - c[1], V[:, 0] - c[0]))


@dataclass(frozen=True)
class ProjectiveMap:
    """``x -> (A x + b) / (w . x + d)``."""

    A: np.ndarray
    b: np.ndarray
    w: np.ndarray
    d: float

    def denominator(self, x):
        return np.asarray(x, dtype=float) @ self.w + self.d

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return (x @ self.A.T + self.b) / self.denominator(x)[..., None]

    def admissible_on(self, h: HRep) -> bool:
        """Denominator positive on the closed polytope and map invertible."""
        M = np.block([[self.A, self.b[:, None]], [self.w[None, :], np.array([[self.d]])]])
        return bool(np.min(self.denominator(h.vertices)) > 1e-6
                    and abs(np.linalg.det(M)) > 1e-9)

    def image(self, h: HRep) -> HRep:
        """Image polytope; admissible projective maps send hulls to hulls."""
        return hrep_from_vrep(VRep(self(h.vertices)))


def sample_interior(h: HRep, m: int, rng, shrink: float = 1.0) -> np.ndarray:
    """Random interior points as Dirichlet(1) mixtures of the vertices.

    ``shrink < 1`` scales the polytope about its Chebyshev center first, so
    every slack is at least ``(1 - shrink) * inradius``.
    """
    V = h.vertices
    W = rng.dirichlet(np.ones(len(V)), size=m)
    X = W @ V
    if shrink != 1.0:
        c = h.interior_point
        X = c + shrink * (X - c)
    return X
