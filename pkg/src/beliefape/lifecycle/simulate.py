"""Monte Carlo simulation of a solved life-cycle model."""
import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .model import gross_from_net, pension_income

CORE_COLUMNS = ["household_id", "wave", "log_consumption", "log_family_income",
                "belief_mean", "belief_var", "log_assets", "age", "weight"]


@dataclass(frozen=True, eq=False)
class SimulatedPanel:
    """Household-by-period simulation output, arrays of shape ``(n, T)``.

    Attributes
    ----------
    age : ndarray
        Age by period, shape ``(T,)``.
    log_income : ndarray
        Log after-tax labor income (NaN in retirement).
    state : ndarray
        Belief state: permanent component (rational) or mean belief net of
        the age profile (adaptive). NaN in retirement.
    transitory : ndarray
        Transitory income shock (NaN in retirement).
    belief_mean, belief_var : ndarray
        Subjective next-period log-income belief; NaN when next period is
        not a working period.
    assets : ndarray
        Beginning-of-period assets ``z``.
    cash : ndarray
        Cash-on-hand ``(1 + r) z + w``.
    income : ndarray
        After-tax income ``w`` (labor income or pension).
    consumption : ndarray
    gross : ndarray
        Gross labor income (NaN in retirement).
    avg_gross : ndarray
        Running average of gross earnings over the contribution window so
        far (NaN before it starts).
    """

    age: np.ndarray
    log_income: np.ndarray
    state: np.ndarray
    transitory: np.ndarray
    belief_mean: np.ndarray
    belief_var: np.ndarray
    assets: np.ndarray
    cash: np.ndarray
    income: np.ndarray
    consumption: np.ndarray
    gross: np.ndarray
    avg_gross: np.ndarray
    end_assets: np.ndarray

    @property
    def n_households(self):
        return self.assets.shape[0]

    def to_frame(self, positive_assets_only=True, working_only=True):
        """Rows in the panel CSV column layout.

        Rows need a finite belief and, by default, positive assets so that
        ``log_assets`` is defined.
        """
        n, T = self.assets.shape
        hh = np.repeat(np.arange(1, n + 1), T)
        wave = np.tile(np.arange(T), n)
        keep = np.ones(n * T, bool)
        if working_only:
            keep &= np.isfinite(self.belief_mean).ravel()
        z = self.assets.ravel()
        if positive_assets_only:
            keep &= z > 0.0
        with np.errstate(divide="ignore"):
            log_z = np.log(z)
        frame = pd.DataFrame({
            "household_id": hh[keep],
            "wave": wave[keep],
            "log_consumption": np.log(self.consumption.ravel()[keep]),
            "log_family_income": np.log(self.income.ravel()[keep]),
            "belief_mean": self.belief_mean.ravel()[keep],
            "belief_var": self.belief_var.ravel()[keep],
            "log_assets": log_z[keep],
            "age": np.tile(self.age, n)[keep].astype(float),
            "weight": np.ones(int(keep.sum())),
        })
        return frame[CORE_COLUMNS]

    def age_profiles(self):
        """Cross-sectional means and variances of key variables by age."""
        rows = {"age": self.age}
        for name, arr in (("consumption", self.consumption), ("assets", self.assets),
                          ("income", self.income)):
            rows[f"mean_{name}"] = arr.mean(axis=0) if arr.shape[0] else np.full(arr.shape[1], np.nan)
            logs = np.log(np.where(arr > 0, arr, np.nan))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                rows[f"var_log_{name}"] = (np.nanvar(logs, axis=0) if arr.shape[0]
                                           else np.full(arr.shape[1], np.nan))
        return pd.DataFrame(rows)


def simulate(policy, model, n_households, seed):
    """Simulate ``n_households`` life cycles from zero initial assets.

    Parameters
    ----------
    policy : PolicySolution
        Solution of ``model``.
    model : LifecycleModel
    n_households : int
    seed : int or numpy.random.SeedSequence
        Shock draws depend only on the seed and the shock variances, so two
        models simulated with the same seed share their random numbers.

    Returns
    -------
    SimulatedPanel
    """
    n, T, T_ret, T_cont = int(n_households), model.T, model.T_ret, model.T_cont
    if n < 0:
        raise ValueError("n_households must be nonnegative")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rng = np.random.default_rng(ss)
    z_eta = rng.standard_normal(n)
    z_v = rng.standard_normal((n, T_ret))
    z_eps = rng.standard_normal((n, T_ret))
    z_u = rng.standard_normal((n, T_ret))

    nan = np.full((n, T), np.nan)
    log_income, state, trans = nan.copy(), nan.copy(), nan.copy()
    bmean, bvar = nan.copy(), nan.copy()
    gross, avg = nan.copy(), nan.copy()
    assets = np.zeros((n, T))
    cash = np.zeros((n, T))
    income = np.zeros((n, T))
    cons = np.zeros((n, T))
    end = np.zeros((n, T))

    R = model.R
    kappa_net = model.log_kappa_net
    var_belief = model.var_v + model.var_eps
    eta = np.sqrt(model.var_eta1) * z_eta
    b = eta.copy()
    z = np.zeros(n)
    A = np.zeros(n)
    for t in range(T_ret):
        if t > 0:
            eta = eta + np.sqrt(model.var_v) * z_v[:, t]
        eps = np.sqrt(model.var_eps) * z_eps[:, t]
        x_base = model.kappa[t] + eta + eps
        x = kappa_net[t] + eta + eps
        if model.adaptive:
            ex = model.expectations
            if t > 0:
                b = b + ex.gain * (eta + eps - b) + np.sqrt(ex.var_u) * z_u[:, t]
            s = b
        else:
            s = eta
        w = np.exp(x)
        g = gross_from_net(np.exp(x_base), model.tax) if n else np.zeros(0)
        if t >= T_cont:
            k = t - T_cont
            A = (k * A + g) / (k + 1.0)
            avg[:, t] = A
        m = R * z + w
        c = policy.working_consumption(t, m, s, A)
        log_income[:, t], state[:, t], trans[:, t] = x, s, eps
        gross[:, t] = g
        if t + 1 < T_ret:
            bmean[:, t] = kappa_net[t + 1] + s
            bvar[:, t] = var_belief
        assets[:, t], cash[:, t], income[:, t], cons[:, t] = z, m, w, c
        z = m - c
        end[:, t] = z
    p = np.maximum(pension_income(A, model), 1e-10) if n else np.zeros(0)
    for t in range(T_ret, T):
        m = R * z + p
        c = policy.retired_consumption(t, m, p)
        assets[:, t], cash[:, t], income[:, t], cons[:, t] = z, m, p, c
        z = m - c
        end[:, t] = z
    return SimulatedPanel(np.arange(T) + 25, log_income, state, trans, bmean, bvar,
                          assets, cash, income, cons, gross, avg, end)
