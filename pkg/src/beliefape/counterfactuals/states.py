"""Counterfactual incomes and beliefs under a change of tax schedule.

Log family income and the belief about next-period log income are both
net of taxes. Changing the schedule from ``tax0`` to ``tax1`` maps log net
income through gross income, which is affine in logs, so normal beliefs
stay normal with a shifted mean and rescaled variance.
"""
from dataclasses import dataclass

import numpy as np

from ..beliefs import NormalBelief, shift_full
from ..econometrics.design import weighted_mean
from .tax import TaxSchedule, log_net_map, revenue_neutral_lambda

BASELINE_LAMBDA = 0.94
BASELINE_TAU = 0.196
PERMANENT_CUT = 0.1
REGRESSIVE_TAU = 0.142


@dataclass(frozen=True, eq=False)
class CounterfactualStates:
    """Per-row counterfactual log income and belief parameters.

    Attributes
    ----------
    x1 : ndarray
        Log family income.
    mu1, sigma2_1 : ndarray
        Belief mean and variance.
    name : str
    """

    x1: np.ndarray
    mu1: np.ndarray
    sigma2_1: np.ndarray
    name: str = ""

    def __post_init__(self):
        if np.any(np.asarray(self.sigma2_1) < 0.0):
            raise ValueError("counterfactual belief variance must be nonnegative")

    def as_columns(self):
        return {"log_family_income": np.asarray(self.x1, float),
                "belief_mean": np.asarray(self.mu1, float),
                "belief_var": np.asarray(self.sigma2_1, float)}

    @classmethod
    def unchanged(cls, panel, name="null"):
        return cls(panel.column("x"), panel.column("mu"), panel.column("sigma2"), name)


def anchor_mean_gross(log_net, lambda_rel, tau, weights=None):
    """Mean gross income ``K`` consistent with observed net incomes.

    Solves ``K = E[gross]`` where gross incomes invert the schedule with
    ``lambda_tilde = lambda_rel * K**tau``; the fixed point has the closed
    form ``K = E[(net / lambda_rel)**(1 / (1 - tau))]**(1 - tau)``.
    """
    log_net = np.asarray(log_net, dtype=float)
    w = np.ones(len(log_net)) if weights is None else np.asarray(weights, dtype=float)
    e = (log_net - np.log(lambda_rel)) / (1.0 - tau)
    top = e.max()
    log_mean = top + np.log(np.average(np.exp(e - top), weights=w))
    return float(np.exp((1.0 - tau) * log_mean))


def baseline_schedule(panel, lambda_rel=BASELINE_LAMBDA, tau=BASELINE_TAU):
    """Baseline schedule anchored at the panel's implied mean gross income."""
    K = anchor_mean_gross(panel.column("x"), lambda_rel, tau, panel.weight)
    return TaxSchedule(lambda_rel, tau, K)


def shift_states(panel, tax0, tax1, shares=1.0, name=""):
    """Closed-form counterfactual states when the schedule changes.

    Parameters
    ----------
    panel : Panel
    tax0, tax1 : TaxSchedule
    shares : float or ndarray
        Each respondent's share ``r`` of family income, in ``(0, 1]``.

    Returns
    -------
    CounterfactualStates
    """
    r = np.broadcast_to(np.asarray(shares, dtype=float), (len(panel),))
    if np.any((r <= 0.0) | (r > 1.0)):
        raise ValueError("income shares must lie in (0, 1]")
    x0 = panel.column("x")
    mu0 = panel.column("mu")
    s0 = panel.column("sigma2")
    t0, t1 = tax0.tau, tax1.tau
    l0, l1 = tax0.log_lambda_tilde, tax1.log_lambda_tilde
    dmu = ((l1 - (1.0 - t1) / (1.0 - t0) * l0) + (t0 - t1) / (1.0 - t0) * mu0
           + np.log(r) * (t1 - t0) / (1.0 - t0))
    s1 = s0 * ((1.0 - t1) / (1.0 - t0)) ** 2
    dx = l1 - l0 + (x0 - l0) / (1.0 - t0) * (t0 - t1)
    return CounterfactualStates(x0 + dx, mu0 + dmu, s1, name)


def shift_states_via_beliefs(panel, tax0, tax1, shares=1.0, name=""):
    """Same states built from :func:`shift_full` on each respondent's belief.

    Income uses the map with unit share, beliefs the map with the
    respondent's own share.
    """
    r = np.broadcast_to(np.asarray(shares, dtype=float), (len(panel),))
    x0 = panel.column("x")
    mu0 = panel.column("mu")
    s0 = panel.column("sigma2")
    fam = log_net_map(tax0, tax1)
    mu1 = np.empty(len(panel))
    s1 = np.empty(len(panel))
    for i in range(len(panel)):
        b = shift_full(NormalBelief(mu0[i], s0[i]), log_net_map(tax0, tax1, r[i]))
        mu1[i], s1[i] = b.mu, b.sigma2
    return CounterfactualStates(fam(x0), mu1, s1, name)


def transitory_states(panel, tax0=None, cut=PERMANENT_CUT):
    """Income falls as under the permanent cut this period; beliefs do not move."""
    perm = permanent_states(panel, tax0, cut)
    return CounterfactualStates(perm.x1, panel.column("mu"), panel.column("sigma2"), "transitory")


def permanent_states(panel, tax0=None, cut=PERMANENT_CUT):
    """Lower the level parameter by ``cut`` at unchanged progressivity."""
    tax0 = baseline_schedule(panel) if tax0 is None else tax0
    tax1 = TaxSchedule(tax0.lambda_rel - cut, tax0.tau, tax0.mean_gross)
    return shift_states(panel, tax0, tax1, name="permanent")


def regressivity_states(panel, tax0=None, tau1=REGRESSIVE_TAU):
    """Lower progressivity to ``tau1`` with the revenue-neutral level parameter."""
    tax0 = baseline_schedule(panel) if tax0 is None else tax0
    x = panel.column("x")
    w = panel.weight
    m = weighted_mean(x, w)
    sd = float(np.sqrt(np.average((x - m) ** 2, weights=w)))
    lt1 = revenue_neutral_lambda(tax0, tau1, m, sd)
    tax1 = TaxSchedule.from_lambda_tilde(lt1, tau1, tax0.mean_gross)
    return shift_states(panel, tax0, tax1, name="regressivity")


COUNTERFACTUALS = {
    "transitory": transitory_states,
    "permanent": permanent_states,
    "regressivity": regressivity_states,
}
