"""Isometric embeddings of polytopal Hilbert geometries into normed spaces.

A point of the open n-simplex with barycentric weights ``alpha`` maps to the
class of ``log(alpha)`` modulo constant vectors.  With the half-range norm

    ||w|| = (max_i w_i - min_i w_i) / 2

this is an isometry, because the simplex distance is half the range of the
log-ratios of barycentric weights.

A polytope with N+1 facets is an affine slice of an N-simplex: rescale the
facet functionals so they sum to the constant 1, read them in barycentric
coordinates of n+1 of the polytope's vertices, and extend by one free
coordinate per extra facet.  Composing the slice with the simplex map gives
an isometric embedding into an N-dimensional normed space.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import DegenerateInput, NoPreimage, PointOutside, WrongDimension
from .polytope import TOL, HRep, _affine_rank, _frozen, polygon_order, vrep_from_hrep


@dataclass(frozen=True)
class BarycentricPoint:
    """Strictly positive weights summing to one."""

    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 1 or len(w) < 2:
            raise DegenerateInput("barycentric weights must be a vector of length >= 2")
        if not np.all(w > 0):
            raise PointOutside("barycentric weights must be strictly positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise DegenerateInput("barycentric weights must sum to 1 (got %r)" % w.sum())
        object.__setattr__(self, "weights", w)

    @classmethod
    def normalize(cls, w) -> "BarycentricPoint":
        w = np.asarray(w, dtype=float)
        if not np.all(w > 0):
            raise PointOutside("barycentric weights must be strictly positive")
        return cls(w / w.sum())

    @property
    def dim(self) -> int:
        return len(self.weights) - 1


class PolyhedralNorm:
    """Half-range seminorm on R^m, a norm on the quotient by constants.

    Equivalently the sup of the m(m-1) functionals ``(w_i - w_j) / 2``, so its
    unit ball is a polytope.
    """

    def __init__(self, m: int):
        self.m = int(m)

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        return 0.5 * (w.max(axis=-1) - w.min(axis=-1))

    def functionals(self) -> np.ndarray:
        rows = []
        for i in range(self.m):
            for j in range(self.m):
                if i != j:
                    r = np.zeros(self.m)
                    r[i], r[j] = 0.5, -0.5
                    rows.append(r)
        return np.array(rows)

    def to_json(self) -> dict:
        return {"type": "half-range", "m": self.m,
                "rule": "0.5*(max(w)-min(w))"}


def _canonical(w):
    # shift by the first entry first so constant vectors give exact zeros
    w = np.asarray(w, dtype=float)
    w = w - w[..., :1]
    return w - w.mean(axis=-1, keepdims=True)


def simplex_embed(p) -> np.ndarray:
    """Zero-mean representative of ``log(alpha)``.

    Accepts a :class:`BarycentricPoint` or an array of positive weights
    (stacks allowed; weights need not be normalized since constants are
    quotiented out).
    """
    a = p.weights if isinstance(p, BarycentricPoint) else np.asarray(p, dtype=float)
    if not np.all(a > 0):
        raise PointOutside("barycentric weights must be strictly positive")
    return _canonical(np.log(a))


def simplex_embed_inverse(w) -> BarycentricPoint:
    """Inverse of :func:`simplex_embed`: softmax of any representative."""
    w = np.asarray(w, dtype=float)
    e = np.exp(w - w.max())
    return BarycentricPoint.normalize(e)


def ratio_coords(p) -> np.ndarray:
    """Planar triple ``(log a1/a2, log a2/a3, log a3/a1)`` on the plane x+y+z=0."""
    a = p.weights if isinstance(p, BarycentricPoint) else np.asarray(p, dtype=float)
    if a.shape[-1] != 3:
        raise WrongDimension("the ratio triple is defined for the triangle only")
    la = np.log(a)
    return np.stack([la[..., 0] - la[..., 1], la[..., 1] - la[..., 2],
                     la[..., 2] - la[..., 0]], axis=-1)


def ratio_coords_inverse(xyz) -> BarycentricPoint:
    """``(e^(x+y), e^y, 1)`` normalized to sum one.

    The normalizer is the sum of the three numerators.
    """
    x, y, z = np.asarray(xyz, dtype=float)
    if abs(x + y + z) > 1e-9 * (1 + abs(x) + abs(y)):
        raise DegenerateInput("ratio triple must lie on the plane x+y+z=0")
    num = np.array([np.exp(x + y), np.exp(y), 1.0])
    return BarycentricPoint(num / num.sum())


def simplex_distance(p, q) -> float:
    """Hilbert distance of the simplex in barycentric weights."""
    return float(PolyhedralNorm(0)(simplex_embed(p) - simplex_embed(q)))


# --- simplex section ---------------------------------------------------------


def _summing_scales(G, c):
    """Positive scales ``lam`` with ``sum_i lam_i L_i`` identically 1."""
    N = G.shape[0]
    res = linprog(np.ones(N), A_eq=G.T, b_eq=np.zeros(G.shape[1]),
                  bounds=[(1.0, None)] * N, method="highs")
    if res.status != 0:
        raise DegenerateInput("facet gradients admit no positive null combination")
    lam = res.x
    return lam / (lam @ c)


def _independent_rows(A, tol=1e-10):
    """Greedy rank-building scan: indices of a maximal independent row set."""
    chosen = []
    basis = np.zeros((0, A.shape[1]))
    for i, row in enumerate(A):
        r = row - basis.T @ (basis @ row) if len(basis) else row.copy()
        nr = np.linalg.norm(r)
        if nr > tol * max(1.0, np.linalg.norm(row)):
            chosen.append(i)
            basis = np.vstack([basis, r / nr])
            if len(chosen) == A.shape[1]:
                break
    return chosen


def _affine_basis(V):
    idx = [0]
    for i in range(1, len(V)):
        if _affine_rank(V[idx + [i]]) == len(idx):
            idx.append(i)
            if len(idx) == V.shape[1] + 1:
                break
    return idx


@dataclass(frozen=True)
class SimplexSectionLift:
    """Polytope ``P`` in R^n realized as ``A_n`` intersected with an N-simplex.

    Attributes
    ----------
    simplex : HRep
        The N-simplex ``{H_i > 0}`` in R^N.
    coefficients : ndarray, shape (N+1, N+1)
        ``H_i(y) = coefficients[i] . y`` in barycentric coordinates ``y`` of
        R^N (the affine basis is e_1, ..., e_N, 0).
    matrix, offset : ndarray
        The affine injection ``A(x) = matrix @ x + offset`` from R^n to R^N.
    order : tuple of int
        Facet indices of the source polytope in simplex-facet order.
    scales : ndarray
        Positive factors with ``sum_i scales_i L_i == 1`` (source order).
    basis : ndarray, shape (n+1, n)
        Vertices of P used as affine basis.
    """

    simplex: HRep
    coefficients: np.ndarray
    matrix: np.ndarray
    offset: np.ndarray
    order: tuple
    scales: np.ndarray
    basis: np.ndarray
    source_dim: int

    @property
    def target_dim(self) -> int:
        return self.simplex.dim

    def __call__(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.matrix.T + self.offset

    def barycentric(self, Y) -> np.ndarray:
        """Simplex barycentric weights ``H_i(Y)`` of points of R^N."""
        Y = np.asarray(Y, dtype=float)
        y = np.concatenate([Y, 1.0 - Y.sum(axis=-1, keepdims=True)], axis=-1)
        return y @ self.coefficients.T

    def section_coordinates(self) -> list[int]:
        """Barycentric coordinates forced to zero on ``A_n`` (0-based)."""
        return list(range(self.source_dim + 1, self.target_dim + 1))

    def to_json(self) -> dict:
        return {"kind": "simplex-section-lift",
                "source_dim": self.source_dim,
                "target_dim": self.target_dim,
                "facet_order": list(self.order),
                "scales": self.scales.tolist(),
                "basis": self.basis.tolist(),
                "coefficients": self.coefficients.tolist(),
                "injection": {"matrix": self.matrix.tolist(), "offset": self.offset.tolist()},
                "zero_coordinates": self.section_coordinates(),
                "simplex": self.simplex.to_json()}


def simplex_section_lift(h: HRep) -> SimplexSectionLift:
    """Affine realization of ``h`` (N+1 facets) as a slice of an N-simplex."""
    n = h.dim
    G, c = np.asarray(h.gradients), np.asarray(h.offsets)
    N = h.n_facets - 1
    lam = _summing_scales(G, c)
    V = h.vertices
    bidx = _affine_basis(V)
    if len(bidx) < n + 1:
        raise DegenerateInput("polytope vertices do not span R^%d" % n)
    E = V[bidx]                                      # (n+1, n)
    a = (E @ G.T + c).T * lam[:, None]               # a[i, j] = scaled L_i(e_j)
    lead = _independent_rows(a)
    if len(lead) < n + 1:
        raise DegenerateInput("fewer than n+1 affinely independent facets")
    order = lead + [i for i in range(N + 1) if i not in lead]
    a = a[order]
    M = np.zeros((N + 1, N + 1))
    M[:, : n + 1] = a
    for i in range(n + 1, N + 1):
        M[i, i] = 1.0
    # Cartesian R^N with basis points e_1..e_N and the origin as last point
    Gs = M[:, :N] - M[:, N:]
    cs = M[:, N]
    simplex = HRep(Gs, cs, prune=False)
    # barycentric coordinates of x w.r.t. E, then pad with zeros
    B = np.vstack([E.T, np.ones((1, n + 1))])        # B @ bary = [x; 1]
    Binv = np.linalg.inv(B)
    bary_mat, bary_off = Binv[:, :n], Binv[:, n]
    mat = np.zeros((N, n))
    off = np.zeros(N)
    k = min(N, n + 1)
    mat[:k] = bary_mat[:k]
    off[:k] = bary_off[:k]
    return SimplexSectionLift(simplex, _frozen(M), _frozen(mat), _frozen(off),
                              tuple(int(i) for i in order), _frozen(lam), _frozen(E), n)


class LogEmbedding:
    """``x -> log of barycentric weights in the lifted simplex``, mod constants.

    Parameters
    ----------
    h : HRep
        Source polytope with N+1 facets; target space is R^(N+1) modulo
        constants, i.e. N-dimensional.
    """

    def __init__(self, h: HRep):
        self.source = h
        self.lift = simplex_section_lift(h)
        self.norm = PolyhedralNorm(h.n_facets)

    @property
    def source_dim(self) -> int:
        return self.source.dim

    @property
    def target_dim(self) -> int:
        return self.lift.target_dim

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.min(self.source.slacks(x)) <= TOL:
            raise PointOutside("point is not strictly interior")
        z = self.lift.barycentric(self.lift(x))
        return simplex_embed(z)

    def distance(self, x, y) -> float:
        return float(self.norm(self(x) - self(y)))

    def preimage(self, w) -> np.ndarray:
        """Point mapping to the class of ``w``.

        Raises
        ------
        NoPreimage
            If the class is not in the image (only a simplex is onto).
        """
        w = np.asarray(w, dtype=float)
        lam = self.lift.scales[list(self.lift.order)]
        G = self.source.gradients[list(self.lift.order)] * lam[:, None]
        c = self.source.offsets[list(self.lift.order)] * lam
        e = np.exp(w - w.max())
        A = np.hstack([G, -e[:, None]])
        sol, *_ = np.linalg.lstsq(A, -c, rcond=None)
        resid = np.linalg.norm(A @ sol + c)
        x = sol[:-1]
        if resid > 1e-9 or sol[-1] <= 0 or not self.source.contains(x):
            raise NoPreimage("class is not in the image (residual %.3g)" % resid)
        return x

    def to_json(self) -> dict:
        lam = self.lift.scales[list(self.lift.order)]
        G = self.source.gradients[list(self.lift.order)] * lam[:, None]
        c = self.source.offsets[list(self.lift.order)] * lam
        return {"kind": "log-embedding",
                "source_dim": self.source_dim,
                "target_dim": self.target_dim,
                "functionals": [{"gradient": g.tolist(), "offset": float(o)}
                                for g, o in zip(G, c)],
                "normalization": "subtract mean",
                "norm": self.norm.to_json(),
                "lift": self.lift.to_json()}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def embed_polytope(h: HRep | LogEmbedding, p) -> np.ndarray:
    """Image of ``p`` (or a stack of points) under the polytope embedding."""
    emb = h if isinstance(h, LogEmbedding) else LogEmbedding(h)
    return emb(p)


# --- the planar unit ball ------------------------------------------------------


def zero_sum_basis(m: int) -> np.ndarray:
    """Orthonormal basis (rows) of the hyperplane ``sum w = 0`` in R^m."""
    q, _ = np.linalg.qr(np.eye(m) - 1.0 / m)
    return q[:, : m - 1].T


def norm_unit_ball_section(m: int = 3) -> np.ndarray:
    """Vertices of the half-range unit ball on the zero-sum subspace of R^m,
    in an orthonormal basis of that subspace (ccw order when m = 3)."""
    B = zero_sum_basis(m)                        # (m-1, m)
    F = PolyhedralNorm(m).functionals() @ B.T    # rows f with f.v <= 1
    ball = HRep(-F, np.ones(len(F)))
    V = vrep_from_hrep(ball).vertices
    if m == 3:
        V = V[polygon_order(V)]
    return V


def polygon_vertex_angles(V) -> np.ndarray:
    """Interior angles (radians) of a convex polygon given in cyclic order."""
    V = np.asarray(V, dtype=float)
    prev = np.roll(V, 1, axis=0) - V
    nxt = np.roll(V, -1, axis=0) - V
    cos = np.sum(prev * nxt, axis=1) / (np.linalg.norm(prev, axis=1) * np.linalg.norm(nxt, axis=1))
    return np.arccos(np.clip(cos, -1.0, 1.0))
