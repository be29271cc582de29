"""Parametric progressive tax schedules.

Net income is ``lambda_tilde * gross**(1 - tau)`` with
``lambda_tilde = lambda_rel * K**tau``, so an earner at the mean gross
income ``K`` keeps a share ``lambda_rel`` of it.
"""
from dataclasses import dataclass

import numpy as np

from ..beliefs import AffineIncomeMap


@dataclass(frozen=True)
class TaxSchedule:
    """Tax schedule in relative-income form.

    Parameters
    ----------
    lambda_rel : float
        Share of income kept by an earner at the mean gross income.
    tau : float
        Progressivity, in ``[0, 1)``.
    mean_gross : float
        Mean gross income ``K`` anchoring the level parameter.
    """

    lambda_rel: float
    tau: float
    mean_gross: float = 1.0

    def __post_init__(self):
        if not self.lambda_rel > 0.0:
            raise ValueError(f"lambda_rel must be positive, got {self.lambda_rel}")
        if not 0.0 <= self.tau < 1.0:
            raise ValueError(f"tau must lie in [0, 1), got {self.tau}")
        if not self.mean_gross > 0.0:
            raise ValueError(f"mean_gross must be positive, got {self.mean_gross}")

    @classmethod
    def from_lambda_tilde(cls, lambda_tilde, tau, mean_gross=1.0):
        return cls(lambda_tilde / mean_gross ** tau, tau, mean_gross)

    @property
    def lambda_tilde(self):
        return self.lambda_rel * self.mean_gross ** self.tau

    @property
    def log_lambda_tilde(self):
        return float(np.log(self.lambda_rel) + self.tau * np.log(self.mean_gross))

    def with_lambda_tilde(self, lambda_tilde):
        return TaxSchedule.from_lambda_tilde(lambda_tilde, self.tau, self.mean_gross)


def net_income(gross, tax):
    """After-tax income ``lambda_tilde * gross**(1 - tau)``."""
    gross = np.asarray(gross, dtype=float)
    if np.any(gross <= 0.0):
        raise ValueError("gross income must be positive")
    out = tax.lambda_tilde * gross ** (1.0 - tax.tau)
    return out if out.ndim else float(out)


def gross_from_net(net, tax):
    """Gross income whose after-tax value is ``net``."""
    net = np.asarray(net, dtype=float)
    if np.any(net <= 0.0):
        raise ValueError("net income must be positive")
    out = (net / tax.lambda_tilde) ** (1.0 / (1.0 - tax.tau))
    return out if out.ndim else float(out)


def log_net_map(tax0, tax1, share=1.0):
    """Affine map of an individual's log net income from ``tax0`` to ``tax1``.

    The individual earns a share ``share`` of family net income and pays
    taxes in proportion to that share, so family gross income is recovered
    from ``log(net) - log(share)`` under ``tax0``.
    """
    slope = (1.0 - tax1.tau) / (1.0 - tax0.tau)
    log_r = float(np.log(share))
    intercept = (tax1.log_lambda_tilde - slope * tax0.log_lambda_tilde
                 + log_r * (1.0 - slope))
    return AffineIncomeMap(intercept, slope)


def revenue_neutral_lambda(tax0, tau1, mu_x, sigma_x):
    """Level parameter keeping expected revenue fixed when ``tau`` changes.

    Gross income is lognormal with the moments implied by log disposable
    income having mean ``mu_x`` and standard deviation ``sigma_x`` under
    ``tax0``. Expected revenue is unchanged iff expected net income is, which
    gives the closed form for ``log lambda_tilde_1``.

    Returns
    -------
    float
        ``lambda_tilde`` of the new schedule.
    """
    mu_w = (mu_x - tax0.log_lambda_tilde) / (1.0 - tax0.tau)
    var_w = (sigma_x / (1.0 - tax0.tau)) ** 2
    dlog = (0.5 * var_w * ((1.0 - tax0.tau) ** 2 - (1.0 - tau1) ** 2)
            + mu_w * (tau1 - tax0.tau))
    return float(np.exp(tax0.log_lambda_tilde + dlog))
