"""Calibration of the finite-horizon consumption-savings economy.

Time is indexed ``t = 0, ..., T - 1`` with age ``25 + t``. Households work
for ``t < T_ret`` and receive a pension afterwards. The pension depends on
average gross earnings over ``T_cont <= t < T_ret``.

Money is measured in currency units; the age profile ``kappa`` is in log
currency units and the tax level parameter ``lambda_tilde`` is expressed in
the same units.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from ..counterfactuals.tax import TaxSchedule, gross_from_net  # noqa: F401


def default_kappa(t_ret=35, level=10.1, slope=0.048, curvature=0.00096):
    """Hump-shaped log earnings profile, quadratic in years of experience.

    Placeholder calibration data: replace with an estimated profile when one
    is available. The defaults rise by 0.6 log points to a peak at 25 years
    of experience.
    """
    e = np.arange(t_ret, dtype=float)
    return level + slope * e - curvature * e ** 2


KAPPA_PROFILES = {
    "quadratic": dict(level=10.1, slope=0.048, curvature=0.00096),
    "flat": dict(level=10.4, slope=0.0, curvature=0.0),
    "steep": dict(level=9.9, slope=0.064, curvature=0.00128),
}


@dataclass(frozen=True)
class PensionRule:
    """Capped piecewise-linear pension formula.

    Bend points and the cap are multiples of economy-wide average gross
    earnings. Benefits are scaled so that a worker with the mean late-career
    gross earnings gets ``target_replacement`` of them before tax, and only
    ``taxable_share`` of the benefit is taxed.
    """

    bend1: float = 0.18
    bend2: float = 1.10
    rates: tuple = (0.90, 0.32, 0.15)
    target_replacement: float = 0.45
    contribution_cap: float = 2.2
    taxable_share: float = 0.85

    def __post_init__(self):
        if not 0.0 < self.bend1 < self.bend2:
            raise ValueError("pension bend points must satisfy 0 < bend1 < bend2")
        r = self.rates
        if len(r) != 3 or not (r[0] > r[1] > r[2] >= 0.0):
            raise ValueError("pension rates must be three strictly decreasing values")
        if not 0.0 < self.taxable_share <= 1.0:
            raise ValueError("taxable_share must lie in (0, 1]")
        if not self.contribution_cap > 0.0 or not self.target_replacement > 0.0:
            raise ValueError("contribution_cap and target_replacement must be positive")


@dataclass(frozen=True)
class Rational:
    """Agents know the income process and observe the permanent component."""

    name = "rational"


@dataclass(frozen=True)
class Adaptive:
    """Mean beliefs move by a fixed share of the forecast error plus noise."""

    gain: float = 0.5
    var_u: float = 0.2
    name = "adaptive"

    def __post_init__(self):
        if self.var_u < 0.0:
            raise ValueError("var_u must be nonnegative")


@dataclass(frozen=True)
class GridSpec:
    """Discretization of the state space and quadrature."""

    n_assets: int = 200
    asset_span: float = 60.0
    asset_curvature: float = 8.0
    n_beliefs: int = 60
    belief_span: float = 4.0
    n_pension: int = 20
    pension_span: float = 1.5
    n_quad: int = 9
    n_retire: int = 300
    retire_span: float = 200.0

    def __post_init__(self):
        if self.n_assets < 3 or self.n_beliefs < 2 or self.n_pension < 1 or self.n_retire < 3:
            raise ValueError("grids need at least 3 asset, 2 belief and 1 pension nodes")
        if self.n_quad < 1:
            raise ValueError("n_quad must be positive")
        if not (self.asset_span > 0 and self.belief_span > 0 and self.pension_span > 0
                and self.retire_span > 0 and self.asset_curvature > 0):
            raise ValueError("grid spans must be positive")


@dataclass(frozen=True, eq=False)
class LifecycleModel:
    """Full calibration of the life-cycle economy.

    ``net_scale`` multiplies every after-tax income flow (wages and
    pensions); it is 1 in the baseline and ``1 - rate`` in a proportional
    income-tax counterfactual. Gross earnings, and hence pension
    entitlements, are computed from the unscaled schedule.
    """

    T: int = 70
    T_ret: int = 35
    T_cont: int = 25
    gamma: float = 2.0
    beta: float = 1.0 / 1.03
    r: float = 0.03
    kappa: np.ndarray = field(default_factory=default_kappa)
    var_eta1: float = 0.15
    var_v: float = 0.01
    var_eps: float = 0.05
    tax: TaxSchedule = field(default_factory=lambda: TaxSchedule.from_lambda_tilde(3.826, 0.137))
    pension: PensionRule = field(default_factory=PensionRule)
    expectations: object = field(default_factory=Rational)
    grid: GridSpec = field(default_factory=GridSpec)
    net_scale: float = 1.0

    def __post_init__(self):
        kappa = np.asarray(self.kappa, dtype=float)
        object.__setattr__(self, "kappa", kappa)
        if not (0 < self.T_ret < self.T and 0 <= self.T_cont < self.T_ret):
            raise ValueError("need 0 < T_ret < T and 0 <= T_cont < T_ret")
        if kappa.shape != (self.T_ret,):
            raise ValueError(f"kappa must have length T_ret={self.T_ret}, got {kappa.shape}")
        if not self.gamma > 0.0 or not self.beta > 0.0 or not self.r > -1.0:
            raise ValueError("need gamma > 0, beta > 0 and r > -1")
        if min(self.var_eta1, self.var_v, self.var_eps) < 0.0:
            raise ValueError("variances must be nonnegative")
        if not self.net_scale > 0.0:
            raise ValueError("net_scale must be positive")
        if not isinstance(self.expectations, (Rational, Adaptive)):
            raise TypeError("expectations must be Rational() or Adaptive(...)")

    @property
    def R(self):
        return 1.0 + self.r

    @property
    def adaptive(self):
        return isinstance(self.expectations, Adaptive)

    def with_net_scale(self, scale):
        return replace(self, net_scale=float(scale))

    def replace(self, **kw):
        return replace(self, **kw)

    @property
    def log_kappa_net(self):
        """Age profile of log net income including ``net_scale``."""
        return self.kappa + np.log(self.net_scale)

    def var_log_income(self, t):
        """Cross-sectional variance of log net income at period ``t``."""
        return self.var_eta1 + np.asarray(t) * self.var_v + self.var_eps

    def mean_gross_by_age(self):
        """Mean gross earnings at each working period under lognormality."""
        t = np.arange(self.T_ret)
        k = 1.0 / (1.0 - self.tax.tau)
        return np.exp(k * (self.kappa - self.tax.log_lambda_tilde)
                      + 0.5 * k ** 2 * self.var_log_income(t))

    @property
    def mean_gross(self):
        """Economy-wide average gross earnings over working ages."""
        return float(self.mean_gross_by_age().mean())

    @property
    def mean_gross_late(self):
        """Average gross earnings over the pension contribution window."""
        return float(self.mean_gross_by_age()[self.T_cont:].mean())

    @property
    def mean_net_income(self):
        """Average after-tax income over working ages (baseline scale)."""
        t = np.arange(self.T_ret)
        return float(np.exp(self.kappa + 0.5 * self.var_log_income(t)).mean())


def _bend_formula(avg, rule, mean_gross):
    b1 = rule.bend1 * mean_gross
    b2 = rule.bend2 * mean_gross
    r1, r2, r3 = rule.rates
    return (r1 * np.minimum(avg, b1)
            + r2 * np.clip(avg - b1, 0.0, b2 - b1)
            + r3 * np.maximum(avg - b2, 0.0))


def pension_benefit(avg_gross, model, scaled=True):
    """Pre-tax pension for average gross earnings ``avg_gross``.

    With ``scaled=False`` the raw bend-point formula is returned, without
    the contribution cap or the replacement-rate scaling.
    """
    avg = np.asarray(avg_gross, dtype=float)
    if np.any(avg < 0.0):
        raise ValueError("average gross earnings must be nonnegative")
    rule = model.pension
    kbar = model.mean_gross
    if not scaled:
        out = _bend_formula(avg, rule, kbar)
        return out if out.ndim else float(out)
    cap = rule.contribution_cap * kbar
    ref = model.mean_gross_late
    scale = rule.target_replacement * ref / _bend_formula(min(ref, cap), rule, kbar)
    out = scale * _bend_formula(np.minimum(avg, cap), rule, kbar)
    return out if out.ndim else float(out)


def pension_income(avg_gross, model):
    """After-tax pension, including the model's ``net_scale``.

    The untaxed share of the benefit is received in full; the taxable share
    goes through the income tax schedule.
    """
    pre = np.asarray(pension_benefit(avg_gross, model), dtype=float)
    theta = model.pension.taxable_share
    taxed = theta * pre
    net_taxed = np.where(taxed > 0.0,
                         model.tax.lambda_tilde * np.maximum(taxed, 1e-300) ** (1.0 - model.tax.tau),
                         0.0)
    out = model.net_scale * ((1.0 - theta) * pre + net_taxed)
    return out if out.ndim else float(out)
