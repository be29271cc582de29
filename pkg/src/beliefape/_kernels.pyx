# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the life-cycle solver, simulator and Lasso.

Every function here has a numpy twin in ``_kernels_py`` with the same
signature and the same arithmetic, so the two agree to rounding error.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, pow, fabs

cnp.import_array()


cdef inline Py_ssize_t _bracket(const double[::1] g, double x) noexcept nogil:
    cdef Py_ssize_t n = g.shape[0]
    cdef Py_ssize_t lo = 0, hi, mid
    if n < 2 or x <= g[0]:
        return 0
    if x >= g[n - 2]:
        return n - 2
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if g[mid] <= x:
            lo = mid
        else:
            hi = mid
    return lo


cdef inline double _weight(const double[::1] g, Py_ssize_t i, double x) noexcept nogil:
    if g.shape[0] < 2:
        return 0.0
    return (x - g[i]) / (g[i + 1] - g[i])


cdef inline double _clamp(const double[::1] g, double x) noexcept nogil:
    cdef Py_ssize_t n = g.shape[0]
    if x < g[0]:
        return g[0]
    if x > g[n - 1]:
        return g[n - 1]
    return x


cdef inline double _tri(const double[:, :, ::1] f, Py_ssize_t j, Py_ssize_t k,
                        Py_ssize_t i, double wb, double wa, double wm,
                        Py_ssize_t nk) noexcept nogil:
    cdef double lo, hi, out
    cdef Py_ssize_t k1 = k + 1 if nk > 1 else k
    lo = (1.0 - wm) * f[j, k, i] + wm * f[j, k, i + 1]
    hi = (1.0 - wm) * f[j, k1, i] + wm * f[j, k1, i + 1]
    out = (1.0 - wa) * lo + wa * hi
    lo = (1.0 - wm) * f[j + 1, k, i] + wm * f[j + 1, k, i + 1]
    hi = (1.0 - wm) * f[j + 1, k1, i] + wm * f[j + 1, k1, i + 1]
    return (1.0 - wb) * out + wb * ((1.0 - wa) * lo + wa * hi)


cdef inline double _util(double c, double gamma) noexcept nogil:
    if gamma == 1.0:
        return log(c)
    return pow(c, 1.0 - gamma) / (1.0 - gamma)


def expect_working(const double[::1] a_grid, const double[::1] b_now,
                   const double[::1] A_now, double R, double gamma,
                   const double[::1] shock_x, const double[::1] shock_b,
                   const double[::1] wq, double kappa_net, double kappa_gross,
                   double log_lam, double inv_omt, double n_prev, int track,
                   const double[:, :, ::1] next_c, const double[:, :, ::1] next_v,
                   const double[::1] m_grid, const double[::1] b_grid,
                   const double[::1] A_grid, double c_floor):
    """Expected marginal utility and value of next-period states.

    For each current (belief, pension) node and quadrature node the next
    period's policy rows are blended across the bracketing belief and
    pension nodes, then interpolated in cash-on-hand along the asset grid.

    Returns two arrays of shape ``(len(b_now), len(A_now), len(a_grid))``.
    """
    cdef Py_ssize_t nj = b_now.shape[0], nk = A_now.shape[0]
    cdef Py_ssize_t ni = a_grid.shape[0], nq = wq.shape[0]
    cdef Py_ssize_t nk_next = A_grid.shape[0], nm = m_grid.shape[0]
    cdef Py_ssize_t j, k, i, q, ib, ia, ia1, im, r
    cdef double b, A, xn, mn, bn, An, g, wb, wa, wm, c, v, w00, w01, w10, w11
    cdef int sq = gamma == 2.0
    out_u = np.zeros((nj, nk, ni))
    out_v = np.zeros((nj, nk, ni))
    crow_arr = np.empty(nm)
    vrow_arr = np.empty(nm)
    cdef double[:, :, ::1] ou = out_u
    cdef double[:, :, ::1] ov = out_v
    cdef double[::1] crow = crow_arr
    cdef double[::1] vrow = vrow_arr
    with nogil:
        for j in range(nj):
            b = b_now[j]
            for k in range(nk):
                A = A_now[k]
                for q in range(nq):
                    bn = _clamp(b_grid, b + shock_b[q])
                    ib = _bracket(b_grid, bn)
                    wb = _weight(b_grid, ib, bn)
                    xn = exp(kappa_net + b + shock_x[q])
                    ia = 0
                    wa = 0.0
                    if track:
                        g = exp((kappa_gross + b + shock_x[q] - log_lam) * inv_omt)
                        An = _clamp(A_grid, (n_prev * A + g) / (n_prev + 1.0))
                        ia = _bracket(A_grid, An)
                        wa = _weight(A_grid, ia, An)
                    ia1 = ia + 1 if nk_next > 1 else ia
                    w00 = (1.0 - wb) * (1.0 - wa)
                    w01 = (1.0 - wb) * wa
                    w10 = wb * (1.0 - wa)
                    w11 = wb * wa
                    for r in range(nm):
                        crow[r] = (w00 * next_c[ib, ia, r] + w01 * next_c[ib, ia1, r]
                                   + w10 * next_c[ib + 1, ia, r] + w11 * next_c[ib + 1, ia1, r])
                        vrow[r] = (w00 * next_v[ib, ia, r] + w01 * next_v[ib, ia1, r]
                                   + w10 * next_v[ib + 1, ia, r] + w11 * next_v[ib + 1, ia1, r])
                    im = 0
                    for i in range(ni):
                        mn = R * a_grid[i] + xn
                        while im < nm - 2 and m_grid[im + 1] <= mn:
                            im += 1
                        wm = (mn - m_grid[im]) / (m_grid[im + 1] - m_grid[im])
                        c = (1.0 - wm) * crow[im] + wm * crow[im + 1]
                        v = (1.0 - wm) * vrow[im] + wm * vrow[im + 1]
                        if c < c_floor:
                            c = c_floor
                        if v < c_floor:
                            v = c_floor
                        if sq:
                            ou[j, k, i] += wq[q] / (c * c)
                            ov[j, k, i] -= wq[q] / v
                        else:
                            ou[j, k, i] += wq[q] * pow(c, -gamma)
                            ov[j, k, i] += wq[q] * _util(v, gamma)
    return out_u, out_v


def interp3(const double[:, :, ::1] f, const double[::1] m_grid,
            const double[::1] b_grid, const double[::1] A_grid,
            const double[::1] m, const double[::1] b, const double[::1] A):
    """Trilinear interpolation of ``f[b, A, m]`` at scattered points.

    Extrapolates linearly in ``m``; ``b`` and ``A`` are clamped to their grids.
    """
    cdef Py_ssize_t n = m.shape[0], p, ib, ia, im
    cdef Py_ssize_t nk = A_grid.shape[0]
    cdef double wb, wa, wm, An, bn
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for p in range(n):
            bn = _clamp(b_grid, b[p])
            ib = _bracket(b_grid, bn)
            wb = _weight(b_grid, ib, bn)
            im = _bracket(m_grid, m[p])
            wm = _weight(m_grid, im, m[p])
            ia = 0
            wa = 0.0
            if nk > 1:
                An = _clamp(A_grid, A[p])
                ia = _bracket(A_grid, An)
                wa = _weight(A_grid, ia, An)
            o[p] = _tri(f, ib, ia, im, wb, wa, wm, nk)
    return out


cdef inline double _soft(double z, double t) noexcept nogil:
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


cdef double _gap(const double[:, ::1] G, const double[::1] xy, double yy,
                 double alpha, const double[::1] beta, const double[::1] q) noexcept nogil:
    cdef Py_ssize_t p = beta.shape[0], j
    cdef double bxy = 0.0, bq = 0.0, l1 = 0.0, dmax = 0.0, d, rr, yr, s
    for j in range(p):
        bxy += beta[j] * xy[j]
        bq += beta[j] * q[j]
        l1 += fabs(beta[j])
        d = fabs(xy[j] - q[j])
        if d > dmax:
            dmax = d
    rr = yy - 2.0 * bxy + bq
    if rr < 0.0:
        rr = 0.0
    yr = yy - bxy
    s = 1.0
    if dmax > alpha:
        s = alpha / dmax
    return 0.5 * rr * (1.0 + s * s) + alpha * l1 - s * yr


def lasso_gram(const double[:, ::1] G, const double[::1] xy, double yy,
               double alpha, double[::1] beta, double tol, int max_iter):
    """Cyclic coordinate descent on ``0.5*||y - X b||^2 + alpha*||b||_1``.

    Works from the Gram matrix ``G = X'X``, ``xy = X'y`` and ``yy = y'y``.
    ``beta`` is the warm start and is updated in place. Stops when the
    duality gap falls below ``tol * 0.5 * yy``.

    Returns
    -------
    gap : float
    n_iter : int
    """
    cdef Py_ssize_t p = beta.shape[0], j, k
    cdef int it = 0
    cdef double old, new, rho, d, gap = 0.0
    cdef double target = tol * 0.5 * yy
    if p == 0:
        return 0.0, 0
    q_arr = np.asarray(G) @ np.asarray(beta)
    cdef double[::1] q = q_arr
    with nogil:
        while it < max_iter:
            it += 1
            for j in range(p):
                if G[j, j] <= 0.0:
                    continue
                old = beta[j]
                rho = xy[j] - q[j] + G[j, j] * old
                new = _soft(rho, alpha) / G[j, j]
                if new != old:
                    d = new - old
                    beta[j] = new
                    for k in range(p):
                        q[k] += d * G[j, k]
            gap = _gap(G, xy, yy, alpha, beta, q)
            if gap <= target:
                break
    return gap, it
