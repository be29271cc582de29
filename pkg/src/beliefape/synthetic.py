"""Synthetic household panels with known consumption rules and survey responses.

Households have a fixed effect that raises income, assets and
consumption, so pooled regressions are biased and first differences are
not. Beliefs about next-period income vary within household over waves.
Log consumption is linear in log income, the belief mean and variance,
log assets and household size, plus the fixed effect and noise.
"""
from dataclasses import dataclass

import numpy as np
import pandas as pd

from . import seeding
from .counterfactuals.ape import plug_in_ape
from .counterfactuals.states import permanent_states
from .econometrics.design import LinearSpec
from .econometrics.ols import fit_spec
from .econometrics.panel import Panel
from .econometrics.resample import cluster_resample
from .elicitation import (GROWTH_COLUMNS, MINMAX_COLUMNS, estimate_growth_batch, estimate_level_batch,
                          synthesize_growth_points, synthesize_minmax)

TRUE_BETA = {"x": 0.30, "mu": 0.40, "sigma2": -0.5, "z": 0.05, "hh_size": 0.02}
GROWTH_BELIEFS = {"mu_mean": 0.02, "mu_sd": 0.05, "log_sigma_mean": np.log(0.03),
                  "log_sigma_sd": 0.4}


@dataclass(frozen=True, eq=False)
class SyntheticData:
    """A panel with true beliefs and the survey responses they generate.

    Attributes
    ----------
    panel : Panel
        True beliefs in ``belief_mean`` and ``belief_var``.
    growth : DataFrame
        Growth-format responses keyed by household and wave.
    minmax : DataFrame
        Min/max responses keyed by household and wave.
    beta : dict
        Data-generating coefficients.
    """

    panel: Panel
    growth: pd.DataFrame
    minmax: pd.DataFrame
    beta: dict


def synthetic_panel(n_households=500, n_waves=4, seed=0, beta=None, m_draws=100,
                    round_to=100.0, prob_step=0.01, beliefs=None, noise_sd=0.05):
    """Simulate a balanced panel and its survey responses.

    Parameters
    ----------
    n_households, n_waves : int
    seed : int
    beta : dict, optional
        Coefficients on ``x, mu, sigma2, z, hh_size``.
    m_draws : int
        Draws behind each growth response.
    round_to, prob_step : float
        Rounding of min/max amounts (currency units) and probabilities.
    beliefs : dict, optional
        Population of growth beliefs, keys as in ``GROWTH_BELIEFS``.
    noise_sd : float
        Standard deviation of the consumption shock.

    Returns
    -------
    SyntheticData
    """
    b = dict(TRUE_BETA if beta is None else beta)
    g = dict(GROWTH_BELIEFS if beliefs is None else beliefs)
    rng = seeding.derive_rng(seed, seeding.SYNTH)
    n, T = int(n_households), int(n_waves)
    alpha = 0.3 * rng.standard_normal(n)
    age0 = rng.integers(25, 56, size=n)
    perm = np.cumsum(0.10 * rng.standard_normal((n, T)), axis=1)
    x = 10.0 + 0.5 * alpha[:, None] + perm + 0.15 * rng.standard_normal((n, T))
    mu_g = g["mu_mean"] + g["mu_sd"] * rng.standard_normal((n, T))
    sg = np.exp(g["log_sigma_mean"] + g["log_sigma_sd"] * rng.standard_normal((n, T)))
    mu = x + mu_g
    s2 = sg ** 2
    z = 9.0 + 0.8 * alpha[:, None] + 0.5 * (x - 10.0) + 0.5 * rng.standard_normal((n, T))
    size0 = rng.integers(1, 5, size=n)
    hh_size = np.clip(size0[:, None] + np.cumsum(rng.integers(-1, 2, size=(n, T)) * (rng.random((n, T)) < 0.2),
                                                 axis=1), 1, 8).astype(float)
    y = (alpha[:, None] + b["x"] * x + b["mu"] * mu + b["sigma2"] * s2 + b["z"] * z
         + b["hh_size"] * hh_size + noise_sd * rng.standard_normal((n, T)))
    hh = np.repeat(np.arange(n), T)
    wave = np.tile(np.arange(T), n)
    frame = pd.DataFrame({
        "household_id": hh, "wave": wave, "log_consumption": y.ravel(),
        "log_family_income": x.ravel(), "belief_mean": mu.ravel(), "belief_var": s2.ravel(),
        "log_assets": z.ravel(), "age": (age0[:, None] + 2 * np.arange(T)).ravel().astype(float),
        "weight": np.repeat(rng.uniform(0.5, 1.5, size=n), T), "hh_size": hh_size.ravel(),
    })
    panel = Panel(frame, controls=["hh_size"])
    pts = synthesize_growth_points(mu_g.ravel(), sg.ravel(), m_draws, rng)
    growth = pd.DataFrame(pts, columns=list(GROWTH_COLUMNS))
    growth.insert(0, "wave", wave)
    growth.insert(0, "household_id", hh)
    growth["log_family_income"] = x.ravel()
    lo, hi, p = synthesize_minmax(mu.ravel(), sg.ravel(), rng=rng, round_to=round_to, prob_step=prob_step)
    minmax = pd.DataFrame({"household_id": hh, "wave": wave, "min_earn": lo, "max_earn": hi,
                           "prob_below_mid": p})
    return SyntheticData(panel, growth, minmax, b)


E2E_SPEC = LinearSpec(("x", "mu", "sigma2", "z", "hh_size"), first_difference=True, name="fd")


def response_panel(data):
    """Panel whose beliefs are to be estimated from the min/max responses it carries."""
    f = data.panel.frame.merge(data.minmax, on=["household_id", "wave"], how="left", validate="1:1")
    return Panel(f, controls=data.panel.controls + list(MINMAX_COLUMNS))


def growth_belief_panel(data):
    """Panel whose beliefs are estimated from the growth-bin responses."""
    mu, sg, _, _ = estimate_growth_batch(data.growth[list(GROWTH_COLUMNS)].to_numpy(float))
    x = data.panel.column("x")
    return data.panel.replace_columns(mu=x + mu, sigma2=sg ** 2)


def beliefs_from_responses(panel):
    """Replace the panel's beliefs by estimates from its min/max columns."""
    f = panel.frame
    mu, sigma, _ = estimate_level_batch(f["min_earn"], f["max_earn"], f["prob_below_mid"])
    return panel.replace_columns(mu=mu, sigma2=sigma ** 2)


def pipeline_estimates(panel, spec=E2E_SPEC, term="mu"):
    """Belief estimation, regression and permanent-cut effects on one sample."""
    est = beliefs_from_responses(panel)
    fit = fit_spec(spec, est)
    ape = plug_in_ape(fit, est, permanent_states(est), spec=spec.name)
    return float(fit.params[term]), ape


@dataclass(frozen=True, eq=False)
class EndToEndResult:
    """Recovered coefficient with its bootstrap interval, and the effects."""

    beta_true: float
    beta_hat: float
    ci: tuple
    ape: object
    boot: np.ndarray

    @property
    def covered(self):
        return bool(self.ci[0] <= self.beta_true <= self.ci[1])


def end_to_end(seed=0, n_households=500, n_waves=4, n_boot=199, level=0.95, term="mu",
               spec=E2E_SPEC, **kwargs):
    """Simulate, elicit, estimate beliefs, regress and evaluate a tax cut.

    The cluster bootstrap resamples households and repeats every step
    after the survey, belief estimation included. The interval is the
    percentile interval of the bootstrap coefficients.

    Returns
    -------
    EndToEndResult
    """
    data = synthetic_panel(n_households, n_waves, seed=seed, **kwargs)
    panel = response_panel(data)
    beta, ape = pipeline_estimates(panel, spec, term)
    boot = np.empty(n_boot)
    cells = np.empty((n_boot,) + ape.estimates().shape)
    for b in range(n_boot):
        rng = seeding.derive_rng(seed, seeding.BOOTSTRAP, b)
        boot[b], ab = pipeline_estimates(cluster_resample(panel, rng), spec, term)
        cells[b] = ab.estimates()
    a = 0.5 * (1.0 - level)
    lo, hi = np.quantile(boot, [a, 1.0 - a])
    if n_boot > 1:
        ape = ape.with_se(cells.std(axis=0, ddof=1))
    return EndToEndResult(float(data.beta[term]), beta, (float(lo), float(hi)), ape, boot)
