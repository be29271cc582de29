"""Normal beliefs about next-period log income and how they move.

A belief is the agent's subjective distribution of next-period log income,
summarized by its mean and variance. This module holds the belief type, the
two counterfactual belief transformations (full adjustment to an affine
income map, and partial adjustment under a Kullback-Leibler cost), and the
two updating rules used by the life-cycle model (Bayesian learning about a
fixed effect, and adaptive expectations).
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np


@dataclass(frozen=True)
class NormalBelief:
    """Normal distribution over log income.

    Parameters
    ----------
    mu : float
        Mean of log income.
    sigma2 : float
        Variance of log income. Zero is allowed and encodes a point mass.
    """

    mu: float
    sigma2: float

    def __post_init__(self):
        if not np.isfinite(self.mu):
            raise ValueError(f"belief mean must be finite, got {self.mu}")
        if not (self.sigma2 >= 0.0) or not np.isfinite(self.sigma2):
            raise ValueError(f"belief variance must be finite and >= 0, got {self.sigma2}")

    @property
    def sd(self):
        return float(np.sqrt(self.sigma2))

    def logpdf(self, x):
        """Log density at ``x``; requires a positive variance."""
        if self.sigma2 <= 0.0:
            raise ValueError("log density undefined for a point-mass belief")
        x = np.asarray(x, dtype=float)
        return -0.5 * (np.log(2.0 * np.pi * self.sigma2) + (x - self.mu) ** 2 / self.sigma2)


@dataclass(frozen=True)
class AffineIncomeMap:
    """Counterfactual map ``x -> intercept + slope * x`` on log income."""

    intercept: float
    slope: float = 1.0

    def __post_init__(self):
        if not self.slope > 0.0:
            raise ValueError(f"slope must be positive, got {self.slope}")

    def __call__(self, x):
        return self.intercept + self.slope * np.asarray(x, dtype=float)

    def then(self, other):
        """Composition: apply ``self`` first, then ``other``."""
        return AffineIncomeMap(other.intercept + other.slope * self.intercept,
                               other.slope * self.slope)


class AdjustmentCost(Enum):
    """Distinguished adjustment-cost values for :func:`shift_kl`."""

    INFINITE = "infinite"


XI_INFINITE = AdjustmentCost.INFINITE


def shift_full(belief, income_map):
    """Belief after full adjustment to an affine change in log income.

    The pushforward of a normal under an affine map is normal, so the
    Kullback-Leibler projection onto the normal family is exact.

    Parameters
    ----------
    belief : NormalBelief
    income_map : AffineIncomeMap

    Returns
    -------
    NormalBelief
        Mean ``intercept + slope * mu`` and variance ``slope**2 * sigma2``.
    """
    return NormalBelief(income_map.intercept + income_map.slope * belief.mu,
                        income_map.slope ** 2 * belief.sigma2)


def shift_kl(belief, delta, xi):
    """Belief after partial adjustment to a location shift of log income.

    The agent picks new parameters to maximize the expected log density of
    the shifted income, penalized by ``xi`` times the divergence of the new
    belief from the old one (expectation taken under the old belief). The
    maximizer is

        mu' = mu + delta / (1 + xi)
        sigma2' = sigma2 + xi * (delta / (1 + xi))**2

    Parameters
    ----------
    belief : NormalBelief
    delta : float
        Location shift of log income.
    xi : float or AdjustmentCost
        Nonnegative adjustment cost; ``AdjustmentCost.INFINITE`` leaves the
        belief unchanged.

    Returns
    -------
    NormalBelief
    """
    if xi is AdjustmentCost.INFINITE:
        return belief
    xi = float(xi)
    if not xi >= 0.0:
        raise ValueError(f"adjustment cost must be >= 0, got {xi}")
    if np.isinf(xi):
        raise ValueError("use AdjustmentCost.INFINITE for an infinite adjustment cost")
    step = delta / (1.0 + xi)
    return NormalBelief(belief.mu + step, belief.sigma2 + xi * step ** 2)


def kl_normal(p, q):
    """Kullback-Leibler divergence of ``p`` from ``q``, ``E_q[log q/p]``.

    ``q`` is the reference (pre-change) belief under which the expectation
    is taken, ``p`` the candidate. The two orientations differ for normals
    with unequal variances.

    Parameters
    ----------
    p, q : NormalBelief

    Returns
    -------
    float
    """
    if p == q:
        return 0.0
    if q.sigma2 <= 0.0:
        raise ValueError("reference belief q must have a positive variance")
    if p.sigma2 <= 0.0:
        raise ValueError("divergence from a point-mass belief is infinite")
    return 0.5 * (np.log(p.sigma2 / q.sigma2)
                  + (q.sigma2 + (q.mu - p.mu) ** 2) / p.sigma2 - 1.0)


@dataclass(frozen=True)
class BayesState:
    """Normal posterior about a fixed income effect.

    Parameters
    ----------
    post_mean : float
        Posterior mean of the fixed effect.
    post_var : float
        Posterior variance of the fixed effect.
    noise_var : float
        Variance of the observation noise around the fixed effect.
    """

    post_mean: float
    post_var: float
    noise_var: float

    def __post_init__(self):
        if not self.post_var > 0.0:
            raise ValueError(f"posterior variance must be positive, got {self.post_var}")
        if not self.noise_var > 0.0:
            raise ValueError(f"noise variance must be positive, got {self.noise_var}")

    @property
    def gain(self):
        """Weight on the newest forecast error in the mean update."""
        return self.post_var / self.noise_var

    def predictive(self):
        """Belief about the next observation."""
        return NormalBelief(self.post_mean, self.post_var + self.noise_var)


def bayes_update(state, observation):
    """Conjugate normal update of a :class:`BayesState` after one observation."""
    post_var = 1.0 / (1.0 / state.post_var + 1.0 / state.noise_var)
    post_mean = state.post_mean + post_var / state.noise_var * (observation - state.post_mean)
    return BayesState(post_mean, post_var, state.noise_var)


def adaptive_update(prev_mean_net, x_net, gamma, shock=0.0):
    """Adaptive-expectations update of the mean belief.

    All inputs are net of the deterministic age profile; the caller adds
    the next-period profile back. Works elementwise on arrays.
    """
    return prev_mean_net + gamma * (x_net - prev_mean_net) + shock
