# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops; see ``_fallback`` for the reference numpy versions."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, exp, sqrt, atan2, INFINITY, tgamma, M_PI, fabs
from libc.stdlib cimport malloc, free

cnp.import_array()

BUSEMANN = 0
HOLMES_THOMPSON = 1


cdef inline double _birkhoff(const double* lo, const double* L, int N) noexcept nogil:
    cdef double r, rmax = -INFINITY, rmin = INFINITY
    cdef int i
    for i in range(N):
        r = log(lo[i]) - log(L[i])
        if r > rmax:
            rmax = r
        if r < rmin:
            rmin = r
    return 0.5 * (rmax - rmin)


def birkhoff_to(const double[::1] lo, const double[:, ::1] L):
    cdef Py_ssize_t M = L.shape[0], m
    cdef int N = L.shape[1]
    out = np.empty(M)
    cdef double[::1] o = out
    with nogil:
        for m in range(M):
            o[m] = _birkhoff(&lo[0], &L[m, 0], N)
    return out


cdef inline void _slacks(const double* G, const double* c, const double* x,
                         double* L, int N, int n) noexcept nogil:
    cdef int i, j
    cdef double s
    for i in range(N):
        s = c[i]
        for j in range(n):
            s += G[i * n + j] * x[j]
        L[i] = s


cdef int _cholesky(double* A, int n) noexcept nogil:
    # in place, lower triangle; returns 0 on success
    cdef int i, j, k
    cdef double s
    for j in range(n):
        s = A[j * n + j]
        for k in range(j):
            s -= A[j * n + k] * A[j * n + k]
        if s <= 0:
            return 1
        A[j * n + j] = sqrt(s)
        for i in range(j + 1, n):
            s = A[i * n + j]
            for k in range(j):
                s -= A[i * n + k] * A[j * n + k]
            A[i * n + j] = s / A[j * n + j]
    return 0


cdef void _chol_solve(const double* Lc, double* b, int n) noexcept nogil:
    cdef int i, k
    cdef double s
    for i in range(n):
        s = b[i]
        for k in range(i):
            s -= Lc[i * n + k] * b[k]
        b[i] = s / Lc[i * n + i]
    for i in range(n - 1, -1, -1):
        s = b[i]
        for k in range(i + 1, n):
            s -= Lc[k * n + i] * b[k]
        b[i] = s / Lc[i * n + i]


cdef double _phi(const double* L, const double* x, const double* y, int N, int n) noexcept nogil:
    cdef double s = 0
    cdef int i
    for i in range(N):
        s += L[i] * log(L[i]) - L[i]
    for i in range(n):
        s -= y[i] * x[i]
    return s


cdef int _newton(const double* G, const double* c, const double* y, double* x,
                 int N, int n, double tol, int maxiter,
                 double* L, double* Ln, double* grad, double* H, double* step,
                 double* xn) noexcept nogil:
    cdef int it, i, j, k, bt
    cdef double dec, rate, amax, alpha, phi0, phin, slope, li, moved
    cdef bint ok
    for it in range(maxiter):
        _slacks(G, c, x, L, N, n)
        for j in range(n):
            grad[j] = -y[j]
        for j in range(n * n):
            H[j] = 0
        for i in range(N):
            li = log(L[i])
            for j in range(n):
                grad[j] += li * G[i * n + j]
                for k in range(j + 1):
                    H[j * n + k] += G[i * n + j] * G[i * n + k] / L[i]
        for j in range(n):
            step[j] = -grad[j]
        if _cholesky(H, n) != 0:
            return maxiter
        _chol_solve(H, step, n)
        dec = 0
        for j in range(n):
            dec -= grad[j] * step[j]
        if dec <= tol:
            return it
        amax = INFINITY
        for i in range(N):
            rate = 0
            for j in range(n):
                rate += G[i * n + j] * step[j]
            if rate < 0 and L[i] / -rate < amax:
                amax = L[i] / -rate
        alpha = 0.9 * amax
        if alpha > 1.0:
            alpha = 1.0
        phi0 = _phi(L, x, y, N, n)
        slope = -dec
        for bt in range(60):
            for j in range(n):
                xn[j] = x[j] + alpha * step[j]
            _slacks(G, c, xn, Ln, N, n)
            ok = True
            for i in range(N):
                if Ln[i] <= 0:
                    ok = False
                    break
            if ok:
                phin = _phi(Ln, xn, y, N, n)
                if phin <= phi0 + 1e-4 * alpha * slope + 1e-13 * (1 + fabs(phi0)):
                    break
            alpha *= 0.5
        moved = 0
        for j in range(n):
            moved += fabs(alpha * step[j]) / (1 + fabs(x[j]))
            x[j] = x[j] + alpha * step[j]
        if moved < 1e-16:
            # stuck at the floating-point floor
            return maxiter
    return maxiter


def bernig_inverse(const double[:, ::1] G, const double[::1] c, const double[:, ::1] Y,
                   const double[::1] x0, double tol=1e-20, int maxiter=200):
    cdef int N = G.shape[0], n = G.shape[1]
    cdef Py_ssize_t M = Y.shape[0], m
    X = np.tile(np.asarray(x0, dtype=float), (M, 1))
    iters = np.empty(M, dtype=np.int64)
    cdef double[:, ::1] Xv = X
    cdef long long[::1] itv = iters
    cdef double* work = <double*>malloc((2 * N + 3 * n + n * n) * sizeof(double))
    try:
        with nogil:
            for m in range(M):
                itv[m] = _newton(&G[0, 0], &c[0], &Y[m, 0], &Xv[m, 0], N, n, tol, maxiter,
                                 work, work + N, work + 2 * N, work + 2 * N + n,
                                 work + 2 * N + n + n * n, work + 2 * N + 2 * n + n * n)
    finally:
        free(work)
    return X, iters


cdef double _finsler(const double* G, const double* L, const double* d, int N, int n) noexcept nogil:
    cdef double a, amax = -INFINITY, amin = INFINITY
    cdef int i, j
    for i in range(N):
        a = 0
        for j in range(n):
            a += G[i * n + j] * d[j]
        a /= L[i]
        if a > amax:
            amax = a
        if a < amin:
            amin = a
    return 0.5 * (amax - amin)


cdef double _area_2d(const double* G, const double* L, const double* x, const double* V,
                     int N, int nv, bint polar, double* D, double* ang, int* idx,
                     double* P) noexcept nogil:
    cdef int K = 2 * nv, k, j, t, nxt, cnt
    cdef double F, cr, area = 0, key, px, py, qx, qy, sc
    cdef double x0 = 0, y0 = 0, fx = 0, fy = 0, xi0, xi1
    cdef bint have = False
    for k in range(nv):
        D[2 * k] = V[2 * k] - x[0]
        D[2 * k + 1] = V[2 * k + 1] - x[1]
        D[2 * (k + nv)] = -D[2 * k]
        D[2 * (k + nv) + 1] = -D[2 * k + 1]
    for k in range(K):
        ang[k] = atan2(D[2 * k + 1], D[2 * k])
        idx[k] = k
    for k in range(1, K):
        t = idx[k]
        key = ang[t]
        j = k - 1
        while j >= 0 and ang[idx[j]] > key:
            idx[j + 1] = idx[j]
            j -= 1
        idx[j + 1] = t
    for k in range(K):
        t = idx[k]
        F = _finsler(G, L, &D[2 * t], N, 2)
        P[2 * k] = D[2 * t] / F
        P[2 * k + 1] = D[2 * t + 1] / F
    if not polar:
        for k in range(K):
            nxt = (k + 1) % K
            area += P[2 * k] * P[2 * nxt + 1] - P[2 * k + 1] * P[2 * nxt]
        return 0.5 * area
    cnt = 0
    for k in range(K):
        nxt = (k + 1) % K
        px = P[2 * k]
        py = P[2 * k + 1]
        qx = P[2 * nxt]
        qy = P[2 * nxt + 1]
        cr = px * qy - py * qx
        sc = sqrt(px * px + py * py) * sqrt(qx * qx + qy * qy)
        if fabs(cr) <= 1e-12 * sc:
            continue
        xi0 = (qy - py) / cr
        xi1 = (px - qx) / cr
        if have:
            area += x0 * xi1 - y0 * xi0
        else:
            fx = xi0
            fy = xi1
            have = True
        x0 = xi0
        y0 = xi1
        cnt += 1
    area += x0 * fy - y0 * fx
    return 0.5 * area


def tangent_volume_2d(const double[:, ::1] G, const double[::1] c, X,
                      const double[:, ::1] verts, bint polar):
    cdef double[:, ::1] Xv = np.ascontiguousarray(np.atleast_2d(X), dtype=float)
    cdef int N = G.shape[0], nv = verts.shape[0]
    cdef Py_ssize_t M = Xv.shape[0], m
    out = np.empty(M)
    cdef double[::1] o = out
    cdef double* L = <double*>malloc(N * sizeof(double))
    cdef double* D = <double*>malloc(4 * nv * sizeof(double))
    cdef double* P = <double*>malloc(4 * nv * sizeof(double))
    cdef double* ang = <double*>malloc(2 * nv * sizeof(double))
    cdef int* idx = <int*>malloc(2 * nv * sizeof(int))
    try:
        with nogil:
            for m in range(M):
                _slacks(&G[0, 0], &c[0], &Xv[m, 0], L, N, 2)
                o[m] = _area_2d(&G[0, 0], L, &Xv[m, 0], &verts[0, 0], N, nv, polar,
                                D, ang, idx, P)
    finally:
        free(L); free(D); free(P); free(ang); free(idx)
    return out


cdef double _ball_volume_quad(const double* G, const double* L, const double* dirs,
                              int N, int n, int K, double* A, double* W) noexcept nogil:
    # whitened quadrature: a' = Lw^{-1} a with W = Lw Lw^T
    cdef int i, j, k, l
    cdef double s, detR = 1, amax, amin, a, acc = 0, F
    for i in range(N):
        for j in range(n):
            A[i * n + j] = G[i * n + j] / L[i]
    for j in range(n * n):
        W[j] = 0
    for i in range(N):
        for j in range(n):
            for k in range(j + 1):
                W[j * n + k] += A[i * n + j] * A[i * n + k]
    if _cholesky(W, n) != 0:
        return -1
    for j in range(n):
        detR *= W[j * n + j]
    for i in range(N):
        for j in range(n):
            s = A[i * n + j]
            for l in range(j):
                s -= W[j * n + l] * A[i * n + l]
            A[i * n + j] = s / W[j * n + j]
    for k in range(K):
        amax = -INFINITY
        amin = INFINITY
        for i in range(N):
            a = 0
            for j in range(n):
                a += A[i * n + j] * dirs[k * n + j]
            if a > amax:
                amax = a
            if a < amin:
                amin = a
        F = 0.5 * (amax - amin)
        a = 1.0 / F
        s = a
        for j in range(1, n):
            s *= a
        acc += s
    return acc / detR


cdef double _sphere_area(int n) noexcept nogil:
    return 2 * M_PI ** (n / 2.0) / tgamma(n / 2.0)


def tangent_volume_quadrature(const double[:, ::1] G, const double[::1] c, X,
                              const double[:, ::1] dirs, bint polar):
    if polar:
        from . import _fallback
        return _fallback.tangent_volume_quadrature(np.asarray(G), np.asarray(c), X,
                                                   np.asarray(dirs), True)
    cdef double[:, ::1] Xv = np.ascontiguousarray(np.atleast_2d(X), dtype=float)
    cdef int N = G.shape[0], n = G.shape[1], K = dirs.shape[0]
    cdef Py_ssize_t M = Xv.shape[0], m
    cdef double w = _sphere_area(n) / K / n
    out = np.empty(M)
    cdef double[::1] o = out
    cdef double* L = <double*>malloc(N * sizeof(double))
    cdef double* A = <double*>malloc(N * n * sizeof(double))
    cdef double* W = <double*>malloc(n * n * sizeof(double))
    try:
        with nogil:
            for m in range(M):
                _slacks(&G[0, 0], &c[0], &Xv[m, 0], L, N, n)
                o[m] = w * _ball_volume_quad(&G[0, 0], L, &dirs[0, 0], N, n, K, A, W)
    finally:
        free(L); free(A); free(W)
    return out


def mc_ball_weights(const double[:, ::1] G, const double[::1] c, const double[::1] lo,
                    double R, const double[:, ::1] Y, const double[::1] x0,
                    const double[:, ::1] verts, const double[:, ::1] dirs, int measure,
                    double tol=1e-20, int maxiter=200):
    cdef int N = G.shape[0], n = G.shape[1], K = dirs.shape[0], nv = verts.shape[0]
    cdef Py_ssize_t M = Y.shape[0], m
    cdef double omega = M_PI ** (n / 2.0) / tgamma(n / 2.0 + 1)
    cdef double wq = _sphere_area(n) / K / n
    cdef double vol, dens, logdet
    cdef int i, j, k
    cdef bint polar = measure == HOLMES_THOMPSON
    cdef bint deferred = polar and n != 2
    w = np.zeros(M)
    inside = np.zeros(M, dtype=np.uint8)
    iters = np.empty(M, dtype=np.int64)
    X = np.empty((M, n))
    cdef double[::1] wv = w
    cdef unsigned char[::1] iv = inside
    cdef long long[::1] itv = iters
    cdef double[:, ::1] Xv = X
    cdef int nwork = 2 * N + 3 * n + 2 * n * n + N * n + 10 * nv + 8
    cdef double* work = <double*>malloc(nwork * sizeof(double))
    cdef int* idx = <int*>malloc((2 * nv + 1) * sizeof(int))
    cdef double* L = work
    cdef double* Ln = work + N
    cdef double* grad = work + 2 * N
    cdef double* H = grad + n
    cdef double* step = H + n * n
    cdef double* xn = step + n
    cdef double* A = xn + n
    cdef double* Wm = A + N * n
    cdef double* D = Wm + n * n
    cdef double* P = D + 4 * nv
    cdef double* ang = P + 4 * nv
    try:
        with nogil:
            for m in range(M):
                for j in range(n):
                    Xv[m, j] = x0[j]
                itv[m] = _newton(&G[0, 0], &c[0], &Y[m, 0], &Xv[m, 0], N, n, tol, maxiter,
                                 L, Ln, grad, H, step, xn)
                _slacks(&G[0, 0], &c[0], &Xv[m, 0], L, N, n)
                if _birkhoff(&lo[0], L, N) > R:
                    continue
                iv[m] = 1
                if deferred:
                    continue
                if n == 2:
                    vol = _area_2d(&G[0, 0], L, &Xv[m, 0], &verts[0, 0], N, nv, polar,
                                   D, ang, idx, P)
                else:
                    vol = wq * _ball_volume_quad(&G[0, 0], L, &dirs[0, 0], N, n, K, A, Wm)
                if measure == 0:
                    dens = omega / vol
                else:
                    dens = vol / omega
                # log det of sum_i g_i g_i^T / L_i
                for j in range(n * n):
                    H[j] = 0
                for i in range(N):
                    for j in range(n):
                        for k in range(j + 1):
                            H[j * n + k] += G[i, j] * G[i, k] / L[i]
                _cholesky(H, n)
                logdet = 0
                for j in range(n):
                    logdet += 2 * log(H[j * n + j])
                wv[m] = dens * exp(-logdet)
    finally:
        free(work)
        free(idx)
    ins = inside.astype(bool)
    if deferred and ins.any():
        from . import _fallback
        Xi = X[ins]
        Li = Xi @ np.asarray(G).T + np.asarray(c)
        pv = _fallback.polar_volume_hull(np.asarray(G), np.asarray(c), Xi)
        H3 = np.einsum("mi,ij,ik->mjk", 1.0 / Li, np.asarray(G), np.asarray(G))
        w[ins] = pv / omega * np.exp(-np.linalg.slogdet(H3)[1])
    return w, ins, iters
