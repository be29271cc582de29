"""Double-Lasso estimation of an average partial effect.

The average partial effect of a counterfactual shift is ``a'v`` where ``a``
are the coefficients of a basis ``psi`` and ``v`` the average change of the
basis under the shift. With an invertible ``A`` whose first column is ``v``,
``a'psi = (A'a)' (A^{-1} psi)`` and the first coefficient in the transformed
basis is ``a'v``. Post-double-selection then gives a valid estimate and
standard error for that one coefficient.
"""
from dataclasses import dataclass, field

import numpy as np

from .. import seeding
from .lasso import cv_lasso, lasso
from .ols import first_difference, wls
from .panel import Panel
from .resample import cluster_resample


@dataclass(frozen=True, eq=False)
class DoubleLassoResult:
    """Output of :func:`double_lasso_ape`.

    Attributes
    ----------
    ape : float
    se : float
        Bootstrap SE when requested, otherwise the analytic cluster SE.
    se_analytic : float
    selected : tuple of str
        Penalized terms kept by either selection step.
    n_terms : int
        Size of the basis plus controls.
    support_share : dict
        Share of shifted rows outside the observed range, per covariate.
    v : ndarray
        Average basis change.
    boot : ndarray
        Bootstrap replications (empty without bootstrap).
    """

    ape: float
    se: float
    se_analytic: float
    selected: tuple
    n_terms: int
    support_share: dict
    v: np.ndarray = field(repr=False)
    boot: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)


def completion_matrix(v, completion=None):
    """Invertible matrix with first column ``v``.

    Without an explicit completion, the canonical column with the largest
    ``|v_l|`` is replaced by ``v`` and moved to the front, which keeps the
    matrix well conditioned whatever the direction of ``v``.

    Returns
    -------
    A : ndarray
    order : ndarray
        Basis index associated with each transformed column (``-1`` for the
        target column when ``completion`` is given).
    """
    v = np.asarray(v, dtype=float)
    L = len(v)
    if completion is not None:
        A = np.array(completion, dtype=float, copy=True)
        A[:, 0] = v
        order = np.arange(L)
    else:
        pivot = int(np.argmax(np.abs(v)))
        order = np.array([pivot] + [i for i in range(L) if i != pivot])
        A = np.eye(L)[:, order]
        A[:, 0] = v
    if not np.all(np.isfinite(A)) or np.linalg.cond(A) > 1e12:
        raise np.linalg.LinAlgError("reparameterization matrix is singular")
    return A, order


def _shift_frame(panel, shift):
    cols = shift.as_columns() if hasattr(shift, "as_columns") else dict(shift)
    frame = panel.frame.copy()
    for k, val in cols.items():
        frame[k] = np.asarray(val, dtype=float)
    return frame


def _estimate(panel, spec, shift, seed, folds, completion, rows=None):
    if len(panel) == 0:
        raise ValueError("empty panel")
    basis = spec.bind(panel)
    shifted = _shift_frame(panel, shift)
    P0 = basis.matrix(panel)
    P1 = basis.matrix(shifted)
    w = panel.weight
    sel = np.ones(len(panel), bool) if rows is None else np.asarray(rows, bool)
    if not sel.any():
        raise ValueError("no rows to average over")
    v = np.average((P1 - P0)[sel], axis=0, weights=w[sel])
    support = basis.support_share(panel, shifted)
    L = P0.shape[1]
    K = basis.control_matrix(panel)
    n_terms = L + K.shape[1]
    if not np.any(v != 0.0):
        return 0.0, 0.0, (), n_terms, support, v
    A, order = completion_matrix(v, completion)
    Pt = np.linalg.solve(A, P0.T).T
    Z = np.column_stack([panel.column("y"), Pt, K])
    D, dw, dc, _ = first_difference(Z, panel.household_id, panel.frame["wave"].to_numpy(),
                                    w, panel.cluster)
    dy, target, rest = D[:, 0], D[:, 1], D[:, 2:]
    names = [basis.names[i] for i in order[1:]] + list(basis.controls)
    always = set(basis.always)
    pen = np.array([n not in always for n in names], bool)
    keep = ~pen
    if pen.any():
        for step, outcome in ((seeding.CV_STEP1, target), (seeding.CV_STEP2, dy)):
            s = seeding.derive_seed(seed, step)
            lam = cv_lasso(rest, outcome, folds, s, pen, dw, dc)
            fit = lasso(rest, outcome, lam, pen, dw)
            keep = keep | (fit.coef != 0.0)
    X = np.column_stack([target, rest[:, keep]])
    final = wls(X, dy, dw, dc, ["target"] + [n for n, k in zip(names, keep) if k])
    selected = tuple(n for n, k, p in zip(names, keep, pen) if k and p)
    return float(final.coef[0]), float(final.se[0]), selected, n_terms, support, v


def double_lasso_ape(panel, spec, shift, seed=0, folds=10, completion=None, n_boot=0,
                     rows=None):
    """Average partial effect of a covariate shift by double Lasso in differences.

    Parameters
    ----------
    panel : Panel
    spec : BasisSpec
    shift : CounterfactualStates or dict
        Per-row counterfactual values of core covariates, as an object with
        ``as_columns()`` or a mapping from column name to values.
    seed : int
        Master seed for fold assignment and bootstrap draws.
    folds : int
        Cross-validation folds for each selection step.
    completion : ndarray, optional
        Columns 2..L of the reparameterization matrix.
    n_boot : int
        Cluster bootstrap replications of the whole pipeline; 0 keeps the
        analytic SE.
    rows : ndarray of bool, optional
        Average the effect over these rows only (all rows by default).

    Returns
    -------
    DoubleLassoResult
    """
    ape, se, selected, n_terms, support, v = _estimate(panel, spec, shift, seed, folds, completion,
                                                        rows)
    boot = np.zeros(0)
    se_boot = se
    if n_boot > 0:
        cols = shift.as_columns() if hasattr(shift, "as_columns") else dict(shift)
        base_cols = {k: panel.frame[k].to_numpy(float) for k in cols}
        delta = {k: np.asarray(cols[k], float) - base_cols[k] for k in cols}
        boot = np.empty(n_boot)
        for b in range(n_boot):
            rng = seeding.derive_rng(seed, seeding.BOOTSTRAP, b)
            bp, idx = _resample_with_index(panel, rng)
            bshift = {k: bp.frame[k].to_numpy(float) + delta[k][idx] for k in cols}
            brows = None if rows is None else np.asarray(rows, bool)[idx]
            boot[b] = _estimate(bp, spec, bshift, seeding.derive_seed(seed, seeding.BOOTSTRAP, b, 1),
                                folds, completion, brows)[0]
        se_boot = float(np.std(boot, ddof=1)) if n_boot > 1 else 0.0
    return DoubleLassoResult(ape, se_boot, se, selected, n_terms, support, v, boot)


def _resample_with_index(panel, rng):
    """Cluster resample that also returns source row indices."""
    tagged = panel.frame.copy()
    tagged["_row"] = np.arange(len(tagged))
    bp = cluster_resample(Panel(tagged, panel.controls + ["_row"]), rng)
    idx = bp.frame["_row"].to_numpy().astype(int)
    frame = bp.frame.drop(columns="_row")
    return Panel(frame, panel.controls), idx
