"""Weighted least squares with cluster-robust inference."""
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
import scipy.linalg
from scipy import stats

from ..errors import RankDeficientError

RANK_TOL = 1e-11


@dataclass(frozen=True, eq=False)
class FitResult:
    """Estimates from :func:`wls`.

    Attributes
    ----------
    names : tuple of str
    coef : ndarray
    vcov : ndarray
        Cluster-robust covariance matrix.
    n_obs, n_clusters : int
    r_squared : float
        Weighted, centered R-squared.
    resid : ndarray
    builder : DesignBuilder or None
        Design used for the fit, needed for counterfactual predictions.
    selected_terms : tuple of str
        Terms kept by a selection step, when there is one.
    """

    names: tuple
    coef: np.ndarray
    vcov: np.ndarray
    n_obs: int
    n_clusters: int
    r_squared: float
    resid: np.ndarray = field(repr=False)
    builder: object = None
    selected_terms: tuple = ()

    @property
    def params(self):
        return pd.Series(self.coef, index=list(self.names))

    @property
    def se(self):
        return np.sqrt(np.clip(np.diag(self.vcov), 0.0, None))

    def table(self):
        se = self.se
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(se > 0, self.coef / se, np.nan)
        df = max(self.n_clusters - 1, 1)
        p = 2.0 * stats.t.sf(np.abs(t), df)
        return pd.DataFrame({"term": list(self.names), "coef": self.coef, "se": se,
                             "t": t, "p_value": p})


def first_difference(values, household, wave, weight=None, cluster=None):
    """Within-household differences of consecutive waves.

    Parameters
    ----------
    values : ndarray, shape (n,) or (n, k)
    household, wave : ndarray, shape (n,)
    weight, cluster : ndarray, optional
        Carried over from the later wave of each pair.

    Returns
    -------
    diff : ndarray
        One row per pair of consecutive observed waves of a household.
    weight, cluster, index : ndarray
        Weight, cluster and row index (into the input) of the later wave.
    """
    values = np.asarray(values, dtype=float)
    household = np.asarray(household)
    order = np.lexsort((np.asarray(wave), household))
    h = household[order]
    same = h[1:] == h[:-1]
    later = order[1:][same]
    earlier = order[:-1][same]
    diff = values[later] - values[earlier]
    w = None if weight is None else np.asarray(weight, dtype=float)[later]
    c = None if cluster is None else np.asarray(cluster)[later]
    return diff, w, c, later


def _cluster_scores(X, u, cluster):
    """Per-cluster sums of ``X * u``."""
    _, inv = np.unique(cluster, return_inverse=True)
    S = np.zeros((inv.max() + 1 if len(inv) else 0, X.shape[1]))
    np.add.at(S, inv, X * u[:, None])
    return S


def wls(X, y, weights=None, clusters=None, names=None, builder=None, check_rank=True):
    """Weighted least squares with household-clustered standard errors.

    The covariance is the sandwich ``c * B M B`` with ``B = (X'WX)^{-1}``,
    ``M`` the sum of outer products of cluster score sums, and
    ``c = G/(G-1) * (N-1)/(N-K)``.

    Parameters
    ----------
    X : ndarray, shape (n, k)
    y : ndarray, shape (n,)
    weights : ndarray, optional
        Survey weights; only their relative size matters.
    clusters : ndarray, optional
        Cluster labels; each row is its own cluster when omitted.
    names : sequence of str, optional

    Returns
    -------
    FitResult

    Raises
    ------
    RankDeficientError
        If the weighted design lacks full column rank.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    names = tuple(names) if names is not None else tuple(f"x{i}" for i in range(k))
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    w = w / w.mean() if n else w
    if clusters is None:
        clusters = np.arange(n)
    if n == 0:
        raise ValueError("cannot fit a regression on zero observations")
    scale = np.sqrt(np.einsum("ij,i,ij->j", X, w, X) / n)
    zero = scale == 0.0
    if np.any(zero):
        raise RankDeficientError([names[i] for i in np.flatnonzero(zero)])
    Xs = X / scale
    G = Xs.T @ (Xs * w[:, None])
    if check_rank and k:
        _, R, piv = scipy.linalg.qr(G, pivoting=True)
        d = np.abs(np.diag(R))
        bad = d < RANK_TOL * d[0]
        if np.any(bad) or n < k:
            cols = piv[bad] if np.any(bad) else piv[n:]
            raise RankDeficientError([names[i] for i in sorted(cols)])
    cho = scipy.linalg.cho_factor(G)
    b = scipy.linalg.cho_solve(cho, Xs.T @ (w * y))
    # one step of iterative refinement
    r = y - Xs @ b
    b = b + scipy.linalg.cho_solve(cho, Xs.T @ (w * r))
    resid = y - Xs @ b
    coef = b / scale

    n_clusters = len(np.unique(clusters))
    S = _cluster_scores(Xs * w[:, None], resid, clusters)
    Binv = scipy.linalg.cho_solve(cho, np.eye(k))
    meat = S.T @ S
    if n_clusters > 1 and n > k:
        c = n_clusters / (n_clusters - 1.0) * (n - 1.0) / (n - k)
    else:
        c = 1.0
    V = c * Binv @ meat @ Binv
    V = 0.5 * (V + V.T)
    V = V / np.outer(scale, scale)
    ybar = np.average(y, weights=w)
    sst = float(np.sum(w * (y - ybar) ** 2))
    r2 = 1.0 - float(np.sum(w * resid ** 2)) / sst if sst > 0 else np.nan
    return FitResult(names, coef, V, n, n_clusters, r2, resid, builder)


def fit_spec(spec, panel):
    """Fit a :class:`LinearSpec` on a panel (levels or first differences)."""
    builder = spec.bind(panel)
    X = builder.matrix(panel)
    y = panel.column("y")
    if spec.first_difference:
        Z = np.column_stack([y, X])
        d, w, c, _ = first_difference(Z, panel.household_id, panel.frame["wave"].to_numpy(),
                                      panel.weight, panel.cluster)
        return wls(d[:, 1:], d[:, 0], w, c, builder.names, builder)
    return wls(X, y, panel.weight, panel.cluster, builder.names, builder)


def f_test(fit, terms):
    """P-value of the joint Wald test that ``terms`` have zero coefficients.

    Uses the cluster-robust covariance and an F reference distribution with
    ``G - 1`` denominator degrees of freedom.
    """
    terms = list(terms)
    if not terms:
        return 1.0
    unknown = [t for t in terms if t not in fit.names]
    if unknown:
        raise KeyError(f"terms not in fit: {unknown}")
    idx = [fit.names.index(t) for t in terms]
    b = fit.coef[idx]
    V = fit.vcov[np.ix_(idx, idx)]
    q = len(idx)
    stat = float(b @ np.linalg.pinv(V) @ b) / q
    if not np.all(np.diag(V) > 0):
        stat = np.inf if np.any(b != 0) else 0.0
    return float(stats.f.sf(stat, q, max(fit.n_clusters - 1, 1)))
