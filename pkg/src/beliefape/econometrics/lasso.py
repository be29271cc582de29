"""Weighted Lasso by coordinate descent, and cross-validated penalty choice.

The objective is

    1 / (2 * sum(w)) * sum_i w_i (y_i - x_i'b)^2 + penalty * sum_j |s_j b_j|

over penalized columns ``j``, where ``s_j`` is the weighted standard
deviation of column ``j`` (its weighted root mean square when no intercept
is fitted). Unpenalized columns are partialled out exactly, and coordinate
descent runs on the Gram matrix of the remaining standardized columns.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .. import kernels
from .ols import wls

DEFAULT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class LassoResult:
    coef: np.ndarray
    intercept: float
    gap: float
    n_iter: int

    @property
    def support(self):
        return np.flatnonzero(self.coef != 0.0)


class _Problem:
    """Sufficient statistics of a weighted Lasso problem.

    Built from the cross-product matrix of ``[U, X_pen, y]`` with ``U`` the
    unpenalized block (including the intercept), so that training sets in
    cross-validation are obtained by subtracting held-out cross-products.
    """

    def __init__(self, C, n_u, scale):
        self.n_u = n_u
        self.scale = scale
        Cuu = C[:n_u, :n_u]
        Cux = C[:n_u, n_u:]
        Cxx = C[n_u:, n_u:]
        if n_u:
            cho = scipy.linalg.cho_factor(Cuu)
            P = scipy.linalg.cho_solve(cho, Cux)
            S = Cxx - Cux.T @ P
            self.proj = P  # (n_u, p + 1): unpenalized coefs on [X_pen, y]
        else:
            S = Cxx
            self.proj = np.zeros((0, Cxx.shape[0]))
        p = Cxx.shape[0] - 1
        s = np.concatenate([scale, [1.0]])
        S = S / np.outer(s, s)
        self.G = np.ascontiguousarray(S[:p, :p])
        self.xy = np.ascontiguousarray(S[:p, p])
        self.yy = float(S[p, p])
        self.p = p

    @property
    def lambda_max(self):
        return float(np.max(np.abs(self.xy))) if self.p else 0.0

    def solve(self, penalty, beta=None, tol=DEFAULT_TOL, max_iter=100_000):
        b = np.zeros(self.p) if beta is None else np.array(beta, dtype=float)
        if self.yy <= 0.0 or penalty >= self.lambda_max:
            return np.zeros(self.p), 0.0, 0
        gap, it = kernels.lasso_gram(self.G, self.xy, self.yy, float(penalty), b, tol, max_iter)
        return b, gap, it

    def unpenalized(self, b_std):
        """Unpenalized coefficients given standardized penalized ones."""
        if not self.n_u:
            return np.zeros(0)
        return self.proj[:, -1] - self.proj[:, :-1] @ (b_std / self.scale)


def _prepare(X, y, penalized, weights, fit_intercept):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    pen = np.ones(k, bool) if penalized is None else np.asarray(penalized, bool)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    w = w / w.sum()
    cols_u = [np.ones(n)] if fit_intercept else []
    cols_u += [X[:, j] for j in np.flatnonzero(~pen)]
    U = np.column_stack(cols_u) if cols_u else np.zeros((n, 0))
    Xp = X[:, pen]
    if fit_intercept:
        mu = w @ Xp
        scale = np.sqrt(np.maximum(w @ (Xp - mu) ** 2, 0.0))
    else:
        scale = np.sqrt(w @ Xp ** 2)
    scale = np.where(scale > 0.0, scale, 1.0)
    Z = np.column_stack([U, Xp, y])
    return Z, w, U.shape[1], scale, pen


def _crossprod(Z, w):
    return Z.T @ (Z * w[:, None])


def _assemble(pen, fit_intercept, b_std, b_u, scale):
    k = len(pen)
    coef = np.zeros(k)
    coef[pen] = b_std / scale
    intercept = 0.0
    if fit_intercept:
        intercept = float(b_u[0])
        b_u = b_u[1:]
    coef[~pen] = b_u
    return coef, intercept


def lambda_max(X, y, penalized=None, weights=None, fit_intercept=False):
    """Smallest penalty at which every penalized coefficient is zero."""
    Z, w, n_u, scale, _ = _prepare(X, y, penalized, weights, fit_intercept)
    return _Problem(_crossprod(Z, w), n_u, scale).lambda_max


def lasso(X, y, penalty, penalized=None, weights=None, fit_intercept=False,
          tol=DEFAULT_TOL, max_iter=100_000, warm_start=None):
    """Weighted Lasso with optional unpenalized columns.

    Parameters
    ----------
    X : ndarray, shape (n, k)
    y : ndarray, shape (n,)
    penalty : float
        Nonnegative penalty on standardized coefficients.
    penalized : ndarray of bool, optional
        Which columns carry the penalty (all by default).
    weights : ndarray, optional
    fit_intercept : bool
    tol : float
        Coordinate descent stops when the duality gap is below
        ``tol * 0.5 * ||y_res||^2`` in the standardized problem.

    Returns
    -------
    LassoResult
        Coefficients on the original scale of ``X``.
    """
    if penalty < 0:
        raise ValueError("penalty must be nonnegative")
    Z, w, n_u, scale, pen = _prepare(X, y, penalized, weights, fit_intercept)
    if penalty == 0.0 or not pen.any():
        X = np.asarray(X, dtype=float)
        D = np.column_stack([np.ones(len(y)), X]) if fit_intercept else X
        fit = wls(D, y, w)
        if fit_intercept:
            return LassoResult(fit.coef[1:], float(fit.coef[0]), 0.0, 0)
        return LassoResult(fit.coef, 0.0, 0.0, 0)
    prob = _Problem(_crossprod(Z, w), n_u, scale)
    warm = None if warm_start is None else np.asarray(warm_start)[pen] * scale
    b_std, gap, it = prob.solve(penalty, warm, tol, max_iter)
    coef, intercept = _assemble(pen, fit_intercept, b_std, prob.unpenalized(b_std), scale)
    return LassoResult(coef, intercept, gap, it)


def penalty_grid(lmax, n=100, decades=4.0):
    """Log-spaced penalties from ``lmax`` down ``decades`` orders of magnitude."""
    if lmax <= 0:
        return np.zeros(1)
    return lmax * np.logspace(0.0, -decades, n)


def assign_folds(clusters, folds, seed):
    """Fold index per row; every cluster lands in exactly one fold."""
    labels, inv = np.unique(np.asarray(clusters), return_inverse=True)
    if len(labels) < folds:
        raise ValueError(f"need at least {folds} clusters for {folds}-fold CV, got {len(labels)}")
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(labels), dtype=int)
    fold_of[rng.permutation(len(labels))] = np.arange(len(labels)) % folds
    return fold_of[inv]


@dataclass(frozen=True, eq=False)
class CVPath:
    penalty: float
    penalties: np.ndarray
    cv_error: np.ndarray
    lambda_max: float


def cv_lasso_path(X, y, folds=10, seed=0, penalized=None, weights=None, clusters=None,
                  fit_intercept=False, n_penalties=100, decades=4.0, tol=DEFAULT_TOL):
    """Cross-validated Lasso penalty with the full error curve.

    The grid starts at the full-sample ``lambda_max``. Each fold is fitted
    along the grid with warm starts; the returned penalty minimizes the
    weighted out-of-fold mean squared error.
    """
    if folds < 2:
        raise ValueError("folds must be at least 2")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    clusters = np.arange(n) if clusters is None else np.asarray(clusters)
    fold = assign_folds(clusters, folds, seed)
    Z, w, n_u, scale, pen = _prepare(X, y, penalized, weights, fit_intercept)
    full = _crossprod(Z, w)
    lmax = _Problem(full, n_u, scale).lambda_max
    grid = penalty_grid(lmax, n_penalties, decades)
    sse = np.zeros(len(grid))
    Xo = np.asarray(X, dtype=float)
    for f in range(folds):
        hold = fold == f
        train_C = full - _crossprod(Z[hold], w[hold])
        wt = w[~hold].sum()
        prob = _Problem(train_C / wt, n_u, scale)
        b = np.zeros(prob.p)
        for i, lam in enumerate(grid):
            b, _, _ = prob.solve(lam, b, tol)
            coef, intercept = _assemble(pen, fit_intercept, b, prob.unpenalized(b), scale)
            r = y[hold] - Xo[hold] @ coef - intercept
            sse[i] += float(w[hold] @ r ** 2)
    err = sse / w.sum()
    best = int(np.argmin(err))
    return CVPath(float(grid[best]), grid, err, lmax)


def cv_lasso(X, y, folds=10, seed=0, penalized=None, weights=None, clusters=None,
             fit_intercept=False, n_penalties=100, decades=4.0):
    """Penalty chosen by cluster-based K-fold cross-validation."""
    return cv_lasso_path(X, y, folds, seed, penalized, weights, clusters,
                         fit_intercept, n_penalties, decades).penalty
