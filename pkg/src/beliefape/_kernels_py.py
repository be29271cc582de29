"""Numpy implementations of the compiled kernels.

Used when the extension module is unavailable or when the environment
variable ``BELIEFAPE_PURE_PYTHON=1`` is set. Signatures and arithmetic
mirror ``_kernels.pyx``.
"""
import numpy as np


def _bracket(g, x):
    n = g.shape[0]
    if n < 2:
        return np.zeros(np.shape(x), dtype=np.intp)
    i = np.searchsorted(g, x, side="right") - 1
    return np.clip(i, 0, n - 2)


def _weight(g, i, x):
    if g.shape[0] < 2:
        return np.zeros(np.shape(x))
    return (x - g[i]) / (g[i + 1] - g[i])


def _tri(f, ib, ia, im, wb, wa, wm):
    nk = f.shape[1]
    ia1 = ia + 1 if nk > 1 else ia
    lo = (1.0 - wm) * f[ib, ia, im] + wm * f[ib, ia, im + 1]
    hi = (1.0 - wm) * f[ib, ia1, im] + wm * f[ib, ia1, im + 1]
    out = (1.0 - wa) * lo + wa * hi
    lo = (1.0 - wm) * f[ib + 1, ia, im] + wm * f[ib + 1, ia, im + 1]
    hi = (1.0 - wm) * f[ib + 1, ia1, im] + wm * f[ib + 1, ia1, im + 1]
    return (1.0 - wb) * out + wb * ((1.0 - wa) * lo + wa * hi)


def _util(c, gamma):
    if gamma == 1.0:
        return np.log(c)
    return c ** (1.0 - gamma) / (1.0 - gamma)


def expect_working(a_grid, b_now, A_now, R, gamma, shock_x, shock_b, wq,
                   kappa_net, kappa_gross, log_lam, inv_omt, n_prev, track,
                   next_c, next_v, m_grid, b_grid, A_grid, c_floor):
    nj, nk, ni = len(b_now), len(A_now), len(a_grid)
    out_u = np.zeros((nj, nk, ni))
    out_v = np.zeros((nj, nk, ni))
    A = np.asarray(A_now)[:, None, None]
    a = np.asarray(a_grid)[None, None, :]
    for j in range(nj):
        b = b_now[j]
        bn = np.clip(b + shock_b, b_grid[0], b_grid[-1])
        ib = _bracket(b_grid, bn)[None, :, None]
        wb = _weight(b_grid, _bracket(b_grid, bn), bn)[None, :, None]
        xn = np.exp(kappa_net + b + shock_x)[None, :, None]
        if track:
            g = np.exp((kappa_gross + b + shock_x - log_lam) * inv_omt)[None, :, None]
            An = np.clip((n_prev * A + g) / (n_prev + 1.0), A_grid[0], A_grid[-1])
            ia = _bracket(A_grid, An)
            wa = _weight(A_grid, ia, An)
        else:
            ia = np.zeros((1, 1, 1), dtype=np.intp)
            wa = np.zeros((1, 1, 1))
        mn = R * a + xn
        im = _bracket(m_grid, mn)
        wm = _weight(m_grid, im, mn)
        ib, ia, im = np.broadcast_arrays(ib, ia, im)
        c = np.maximum(_tri(next_c, ib, ia, im, wb, wa, wm), c_floor)
        v = np.maximum(_tri(next_v, ib, ia, im, wb, wa, wm), c_floor)
        w = np.asarray(wq)[None, :, None]
        out_u[j] = np.broadcast_to((w * c ** (-gamma)).sum(axis=1), (nk, ni))
        out_v[j] = np.broadcast_to((w * _util(v, gamma)).sum(axis=1), (nk, ni))
    return out_u, out_v


def interp3(f, m_grid, b_grid, A_grid, m, b, A):
    m = np.asarray(m, dtype=float)
    b = np.clip(b, b_grid[0], b_grid[-1])
    ib = _bracket(b_grid, b)
    wb = _weight(b_grid, ib, b)
    im = _bracket(m_grid, m)
    wm = _weight(m_grid, im, m)
    if len(A_grid) > 1:
        An = np.clip(A, A_grid[0], A_grid[-1])
        ia = _bracket(A_grid, An)
        wa = _weight(A_grid, ia, An)
    else:
        ia = np.zeros(m.shape, dtype=np.intp)
        wa = np.zeros(m.shape)
    return _tri(f, ib, ia, im, wb, wa, wm)


def _gap(xy, yy, alpha, beta, q):
    bxy = beta @ xy
    rr = max(yy - 2.0 * bxy + beta @ q, 0.0)
    dmax = np.max(np.abs(xy - q)) if len(beta) else 0.0
    s = alpha / dmax if dmax > alpha else 1.0
    return 0.5 * rr * (1.0 + s * s) + alpha * np.abs(beta).sum() - s * (yy - bxy)


def lasso_gram(G, xy, yy, alpha, beta, tol, max_iter):
    p = len(beta)
    if p == 0:
        return 0.0, 0
    q = G @ beta
    target = tol * 0.5 * yy
    gap = 0.0
    it = 0
    diag = np.diag(G)
    while it < max_iter:
        it += 1
        for j in range(p):
            if diag[j] <= 0.0:
                continue
            old = beta[j]
            rho = xy[j] - q[j] + diag[j] * old
            if rho > alpha:
                new = (rho - alpha) / diag[j]
            elif rho < -alpha:
                new = (rho + alpha) / diag[j]
            else:
                new = 0.0
            if new != old:
                beta[j] = new
                q += (new - old) * G[j]
        gap = _gap(xy, yy, alpha, beta, q)
        if gap <= target:
            break
    return gap, it
