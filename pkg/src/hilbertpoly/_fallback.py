"""Pure numpy versions of the hot loops.

Same signatures as the compiled ``_kernels`` module; :mod:`._backend` picks
one at import time.  Everything here is vectorized over samples.
"""
import numpy as np

from .polytope import _enumerate_vertices

BUSEMANN = 0
HOLMES_THOMPSON = 1
CHUNK = 4096


def birkhoff_to(lo, L):
    """Hilbert distance from the point with slacks ``lo`` to each row of L."""
    r = np.log(lo) - np.log(L)
    return 0.5 * (r.max(axis=1) - r.min(axis=1))


def _phi(L, X, Y):
    return np.sum(L * np.log(L) - L, axis=1) - np.sum(Y * X, axis=1)


def bernig_inverse(G, c, Y, x0, tol=1e-20, maxiter=200):
    """Solve ``sum_i log(L_i(x)) g_i = y`` for each row of Y.

    Damped Newton on the convex potential ``sum_i (L_i log L_i - L_i) - y.x``
    with a fraction-to-boundary rule.  Stops on squared Newton decrement
    below ``tol``.

    Returns
    -------
    X : ndarray (M, n)
    iters : ndarray of int (M,)
        Iterations used; ``maxiter`` means not converged.
    """
    G = np.asarray(G, dtype=float)
    Y = np.asarray(Y, dtype=float)
    M, n = Y.shape
    X = np.tile(np.asarray(x0, dtype=float), (M, 1))
    iters = np.full(M, maxiter, dtype=np.int64)
    act = np.arange(M)
    for it in range(maxiter):
        if len(act) == 0:
            break
        Xa, Ya = X[act], Y[act]
        L = Xa @ G.T + c
        grad = np.log(L) @ G - Ya
        H = np.einsum("mi,ij,ik->mjk", 1.0 / L, G, G)
        step = -np.linalg.solve(H, grad[..., None])[..., 0]
        dec = -np.sum(grad * step, axis=1)
        done = dec <= tol
        iters[act[done]] = it
        keep = ~done
        act, Xa, Ya, L, grad, step = act[keep], Xa[keep], Ya[keep], L[keep], grad[keep], step[keep]
        if len(act) == 0:
            break
        rate = step @ G.T
        with np.errstate(divide="ignore", invalid="ignore"):
            amax = np.where(rate < 0, L / -rate, np.inf).min(axis=1)
        alpha = np.minimum(1.0, 0.9 * amax)
        phi0 = _phi(L, Xa, Ya)
        slope = np.sum(grad * step, axis=1)
        pending = np.ones(len(act), dtype=bool)
        for _ in range(60):
            Xn = Xa + alpha[:, None] * step
            Ln = Xn @ G.T + c
            ok = np.all(Ln > 0, axis=1)
            phin = np.full(len(act), np.inf)
            phin[ok] = _phi(Ln[ok], Xn[ok], Ya[ok])
            good = phin <= phi0 + 1e-4 * alpha * slope + 1e-13 * (1 + np.abs(phi0))
            pending &= ~good
            if not pending.any():
                break
            alpha = np.where(pending, 0.5 * alpha, alpha)
        X[act] = Xa + alpha[:, None] * step
        moved = np.sum(np.abs(alpha[:, None] * step) / (1 + np.abs(Xa)), axis=1)
        # stuck at the floating-point floor: leave iters at maxiter
        act = act[moved >= 1e-16]
    return X, iters


def _finsler(G, L, V):
    a = (V @ G.T) / L
    return 0.5 * (a.max(axis=-1) + (-a).max(axis=-1))


def tangent_volume_2d(G, c, X, verts, polar):
    """Exact area of the tangent unit ball (or its polar) at each row of X.

    The Finsler norm is linear between consecutive directions from x to the
    polygon's vertices and their opposites, so the unit ball is the polygon
    on those directions scaled to norm one.
    """
    X = np.atleast_2d(X)
    L = X @ G.T + c                                       # (M, N)
    D = verts[None, :, :] - X[:, None, :]                 # (M, V, 2)
    D = np.concatenate([D, -D], axis=1)                   # (M, K, 2)
    ang = np.arctan2(D[..., 1], D[..., 0])
    order = np.argsort(ang, axis=1)
    D = np.take_along_axis(D, order[..., None], axis=1)
    a = np.einsum("mkj,ij->mki", D, G) / L[:, None, :]
    F = 0.5 * (a.max(axis=-1) + (-a).max(axis=-1))
    P = D / F[..., None]
    Q = np.roll(P, -1, axis=1)
    cross = P[..., 0] * Q[..., 1] - P[..., 1] * Q[..., 0]
    if not polar:
        return 0.5 * cross.sum(axis=1)
    # polar vertex for the edge (P_k, P_k+1): xi with P_k.xi = P_k+1.xi = 1
    scale = np.linalg.norm(P, axis=-1) * np.linalg.norm(Q, axis=-1)
    bad = np.abs(cross) <= 1e-12 * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = np.stack([(Q[..., 1] - P[..., 1]) / cross,
                       (P[..., 0] - Q[..., 0]) / cross], axis=-1)
    K = xi.shape[1]
    for k in range(2 * K - 1, -1, -1):
        kk = k % K
        b = bad[:, kk]
        if b.any():
            xi[b, kk] = xi[b, (kk + 1) % K]
            bad[b, kk] = bad[b, (kk + 1) % K]
    Z = np.roll(xi, -1, axis=1)
    return 0.5 * np.sum(xi[..., 0] * Z[..., 1] - xi[..., 1] * Z[..., 0], axis=1)


def sphere_area(n):
    from math import gamma, pi
    return 2 * pi ** (n / 2) / gamma(n / 2)


def tangent_volume_quadrature(G, c, X, dirs, polar):
    """Tangent-ball (or polar) volume by direction quadrature.

    ``dirs`` are K equal-weight unit directions.  Near the boundary the
    tangent ball is extremely elongated, so it is first mapped by the
    Cholesky factor ``R`` of ``W = sum_i a_i a_i^T`` (``a_i = g_i / L_i``) to a
    well-rounded body B'; then ``vol(B) = vol(B') / det R`` and
    ``vol(B polar) = vol(B' polar) * det R``.  The radial function of B' is
    ``1/F'``; for the polar, the support function of B' is the max over its
    vertices, found by desk-scale enumeration of ``(a'_i - a'_j)/2 . u <= 1``.
    """
    X = np.atleast_2d(X)
    M, n = X.shape
    w = sphere_area(n) / len(dirs) / n
    out = np.empty(M)
    N = G.shape[0]
    ii, jj = np.where(~np.eye(N, dtype=bool))
    for s in range(0, M, CHUNK):
        Xs = X[s: s + CHUNK]
        L = Xs @ G.T + c
        A = G[None, :, :] / L[:, :, None]                    # (m, N, n)
        W = np.einsum("mij,mik->mjk", A, A)
        R = np.swapaxes(np.linalg.cholesky(W), 1, 2)         # W = R^T R
        detR = np.prod(np.diagonal(R, axis1=1, axis2=2), axis=1)
        Ap = np.linalg.solve(np.swapaxes(R, 1, 2), np.swapaxes(A, 1, 2))  # R^T a' = a
        Ap = np.swapaxes(Ap, 1, 2)                           # (m, N, n)
        if not polar:
            a = np.einsum("kj,mij->mki", dirs, Ap)
            F = 0.5 * (a.max(axis=-1) + (-a).max(axis=-1))
            out[s: s + CHUNK] = w * np.sum(F ** -n, axis=1) / detR
            continue
        for m in range(len(Xs)):
            C = 0.5 * (Ap[m, ii] - Ap[m, jj])
            Vb = _enumerate_vertices(-C, np.ones(len(C)))
            h = (dirs @ Vb.T).max(axis=1)
            out[s + m] = w * np.sum(h ** -n) * detR[m]
    return out


def polar_volume_hull(G, c, X):
    """Exact volume of the polar tangent ball for n >= 3.

    The Finsler norm is the support function of the difference body
    ``D = conv{(a_i - a_j)/2}``, so the polar of its unit ball is D itself.
    Its volume is taken in the whitened frame with Qhull.
    """
    from scipy.spatial import ConvexHull
    X = np.atleast_2d(X)
    N = G.shape[0]
    ii, jj = np.where(~np.eye(N, dtype=bool))
    out = np.empty(len(X))
    for m, x in enumerate(X):
        A = G / (x @ G.T + c)[:, None]
        R = np.linalg.cholesky(A.T @ A).T
        Ap = np.linalg.solve(R.T, A.T).T
        out[m] = ConvexHull(0.5 * (Ap[ii] - Ap[jj])).volume * np.prod(np.diag(R))
    return out


def mc_ball_weights(G, c, lo, R, Y, x0, verts, dirs, measure, tol=1e-20, maxiter=200):
    """Monte Carlo weights for samples drawn uniformly in Bernig coordinates.

    Each row of Y is pulled back to ``x`` by Newton; samples inside the ball
    ``d(o, x) <= R`` get weight ``density(x) / det(dPhi(x))``, the rest 0.

    Returns
    -------
    w : ndarray (M,)
    inside : bool ndarray (M,)
    iters : int ndarray (M,)
    """
    from math import gamma, pi
    G = np.asarray(G, dtype=float)
    Y = np.asarray(Y, dtype=float)
    M, n = Y.shape
    omega = pi ** (n / 2) / gamma(n / 2 + 1)
    w = np.zeros(M)
    inside = np.zeros(M, dtype=bool)
    iters = np.zeros(M, dtype=np.int64)
    for s in range(0, M, CHUNK):
        X, it = bernig_inverse(G, c, Y[s: s + CHUNK], x0, tol, maxiter)
        iters[s: s + CHUNK] = it
        L = X @ G.T + c
        ins = birkhoff_to(lo, L) <= R
        inside[s: s + CHUNK] = ins
        if not ins.any():
            continue
        Xi, Li = X[ins], L[ins]
        if n == 2:
            vol = tangent_volume_2d(G, c, Xi, verts, measure == HOLMES_THOMPSON)
        elif measure == HOLMES_THOMPSON:
            vol = polar_volume_hull(G, c, Xi)
        else:
            vol = tangent_volume_quadrature(G, c, Xi, dirs, False)
        dens = omega / vol if measure == BUSEMANN else vol / omega
        H = np.einsum("mi,ij,ik->mjk", 1.0 / Li, G, G)
        _, logdet = np.linalg.slogdet(H)
        w[s: s + CHUNK][ins] = dens * np.exp(-logdet)
    return w, inside, iters
