"""Belief elicitation from coarse survey responses.

Two response formats are supported. In the growth format a respondent
spreads 100 points over twelve income-growth categories. In the min/max
format a respondent reports the lowest and highest income they expect and
the probability of earning less than the midpoint. Both are mapped to a
normal belief by regularizing bin probabilities and fitting a line through
``v_j = mu + sigma * Phi^{-1}(c_j)`` at bin edges ``v_j`` with cumulative
probabilities ``c_j``.
"""
import csv
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.special import ndtr, ndtri

from . import seeding
from .beliefs import NormalBelief
from .econometrics.ols import fit_spec
from .errors import DataError, DegenerateFitError

# survey categories, lowest growth first; the open-ended extremes get finite bounds
GROWTH_EDGES = (-0.10, 0.0, 0.03, 0.05, 0.06, 0.07, 0.08, 0.10, 0.13, 0.15, 0.20, 0.25, 0.35)
GROWTH_LABELS = ("lt0", "0_3", "3_5", "5_6", "6_7", "7_8", "8_10", "10_13", "13_15",
                 "15_20", "20_25", "gt25")
GROWTH_COLUMNS = tuple(f"g_{s}" for s in GROWTH_LABELS)
MINMAX_COLUMNS = ("min_earn", "max_earn", "prob_below_mid")
LIKELIHOOD_TRIALS = 100
TOTAL_POINTS = 100


@dataclass(frozen=True)
class GrowthBinScheme:
    """Edges of the survey's growth bins, including the two added bounds.

    With ``k`` edges there are ``k - 1`` survey bins. Estimation also uses an
    unbounded bin below the first edge and one above the last, each with no
    reported mass.
    """

    edges: tuple = GROWTH_EDGES

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        if e.ndim != 1 or e.size < 2 or np.any(np.diff(e) <= 0.0):
            raise ValueError("bin edges must be strictly increasing with at least two values")

    @property
    def n_bins(self):
        return len(self.edges) - 1

    @property
    def n_total(self):
        """Bins used in regularization: survey bins plus the two open tails."""
        return self.n_bins + 2

    @property
    def interior(self):
        return np.asarray(self.edges[1:-1], dtype=float)

    def bin_of(self, values):
        """Survey bin index of each value; values beyond the bounds fall in the end bins."""
        return np.searchsorted(self.interior, np.asarray(values, dtype=float), side="right")


SHIW_SCHEME = GrowthBinScheme()


@dataclass(frozen=True)
class GrowthResponse:
    """Points per growth bin (lowest bin first), summing to 100.

    ``negative_magnitude`` records the follow-up answer for the lowest bin;
    it is kept for completeness and not used in estimation.
    """

    points: tuple
    negative_magnitude: float = None

    def __post_init__(self):
        p = np.asarray(self.points)
        if p.ndim != 1 or np.any(p < 0) or np.any(p != np.round(p)):
            raise ValueError("points must be nonnegative integers")
        if int(p.sum()) != TOTAL_POINTS:
            raise ValueError(f"points must sum to {TOTAL_POINTS}, got {int(p.sum())}")
        object.__setattr__(self, "points", tuple(int(v) for v in p))

    @property
    def fractions(self):
        return np.asarray(self.points, dtype=float) / TOTAL_POINTS


@dataclass(frozen=True)
class MinMaxResponse:
    """Minimum and maximum expected earnings and P(earnings < midpoint)."""

    min_earn: float
    max_earn: float
    prob_below_mid: float

    def __post_init__(self):
        if not 0.0 < self.min_earn:
            raise ValueError("min_earn must be positive")
        if self.min_earn > self.max_earn:
            raise ValueError("min_earn exceeds max_earn")
        if not 0.0 <= self.prob_below_mid <= 1.0:
            raise ValueError("prob_below_mid must lie in [0, 1]")


@dataclass(frozen=True)
class BeliefFit:
    """A fitted belief with diagnostics.

    Attributes
    ----------
    mu, sigma : float
    n_restrictions : int
        Cumulative-probability equations used by the fit.
    truncated : bool
        The unconstrained slope was negative and ``sigma`` was set to 0.
    cuts, cum : ndarray
        Edges and cumulative probabilities entering the fit.
    """

    mu: float
    sigma: float
    n_restrictions: int
    truncated: bool = False
    cuts: np.ndarray = field(default=None, repr=False)
    cum: np.ndarray = field(default=None, repr=False)

    @property
    def belief(self):
        return NormalBelief(self.mu, self.sigma ** 2)


def largest_remainder(counts, total=TOTAL_POINTS):
    """Scale nonnegative counts to integers summing to ``total``.

    Each entry gets the floor of its exact share; the remaining units go to
    the largest fractional parts, ties to the lower index. Rows of a 2-D
    array are scaled independently.
    """
    counts = np.asarray(counts, dtype=float)
    one = counts.ndim == 1
    c = np.atleast_2d(counts)
    s = c.sum(axis=1, keepdims=True)
    if np.any(s <= 0):
        raise ValueError("counts must have a positive sum")
    exact = c * total / s
    base = np.floor(exact + 1e-12)
    rem = exact - base
    short = (total - base.sum(axis=1)).astype(int)
    order = np.argsort(-rem, axis=1, kind="stable")
    rank = np.empty_like(order)
    np.put_along_axis(rank, order, np.arange(c.shape[1])[None, :].repeat(c.shape[0], 0), axis=1)
    out = base + (rank < short[:, None])
    out = out.astype(int)
    return out[0] if one else out


def synthesize_growth_points(mu_g, sigma_g, m_draws, rng, scheme=SHIW_SCHEME):
    """Point allocations for many respondents at once.

    Each respondent draws ``m_draws`` growth values from their belief, bins
    them, and scales counts to 100 points.

    Returns
    -------
    ndarray, shape (n, n_bins)
    """
    mu_g = np.atleast_1d(np.asarray(mu_g, dtype=float))
    sigma_g = np.broadcast_to(np.asarray(sigma_g, dtype=float), mu_g.shape)
    m = int(m_draws)
    if m < 1:
        raise ValueError("m_draws must be at least 1")
    n = mu_g.size
    draws = mu_g[:, None] + sigma_g[:, None] * rng.standard_normal((n, m))
    idx = scheme.bin_of(draws) + scheme.n_bins * np.arange(n)[:, None]
    counts = np.bincount(idx.ravel(), minlength=n * scheme.n_bins).reshape(n, scheme.n_bins)
    return largest_remainder(counts) if n else np.zeros((0, scheme.n_bins), int)


def synthesize_growth_response(belief_growth, m_draws, seed, scheme=SHIW_SCHEME):
    """One respondent's growth response from ``m_draws`` belief draws."""
    rng = np.random.default_rng(seed)
    pts = synthesize_growth_points([belief_growth.mu], [belief_growth.sd], m_draws, rng, scheme)
    return GrowthResponse(tuple(pts[0]))


def regularize(raw_fractions, m_draws=LIKELIHOOD_TRIALS):
    """Posterior-mean bin probabilities under a Jeffreys prior.

    ``(p_j + 1/(2M)) / (1 + J/(2M))`` with ``J`` the number of bins (the
    last axis).
    """
    p = np.asarray(raw_fractions, dtype=float)
    J = p.shape[-1]
    h = 0.5 / m_draws
    return (p + h) / (1.0 + J * h)


def select_active_bins(raw_fractions, scheme=SHIW_SCHEME):
    """Intervals used in estimation.

    Every bin with positive mass, an aggregate interval from minus infinity
    to the first of them and one from the last of them to plus infinity.
    Bins without mass between positive bins are absorbed into the next
    positive bin's interval.

    Returns
    -------
    list of (float, float)
    """
    p = np.asarray(raw_fractions, dtype=float)
    pos = np.flatnonzero(p > 0)
    if pos.size == 0:
        raise DegenerateFitError("response has no positive bin")
    e = scheme.edges
    cuts = [e[pos[0]]] + [e[j + 1] for j in pos]
    bounds = [-np.inf] + cuts + [np.inf]
    return list(zip(bounds[:-1], bounds[1:]))


def _probit_line(cuts, cum):
    """OLS of edges on normal quantiles; slope truncated at zero."""
    keep = cum < 1.0 - 1e-12
    v = np.asarray(cuts, dtype=float)[keep]
    z = ndtri(np.asarray(cum, dtype=float)[keep])
    if v.size < 2:
        raise DegenerateFitError(f"only {v.size} usable restriction(s)")
    zc = z - z.mean()
    szz = float(zc @ zc)
    if szz <= 0.0:
        raise DegenerateFitError("restrictions do not identify the spread")
    slope = float(zc @ (v - v.mean())) / szz
    if slope < 0.0:
        return BeliefFit(float(v.mean()), 0.0, int(v.size), True, v, cum[keep])
    return BeliefFit(float(v.mean() - slope * z.mean()), slope, int(v.size), False, v, cum[keep])


def fit_growth_response(response, scheme=SHIW_SCHEME, m_draws=LIKELIHOOD_TRIALS):
    """Growth-scale belief with fit diagnostics."""
    pts = np.asarray(getattr(response, "points", response), dtype=float)
    if pts.shape != (scheme.n_bins,):
        raise ValueError(f"expected {scheme.n_bins} bins, got {pts.shape}")
    if pts.sum() <= 0 or np.any(pts < 0):
        raise DegenerateFitError("response has no positive bin")
    raw = pts / pts.sum()
    full = np.concatenate([[0.0], raw, [0.0]])
    pt = regularize(full, m_draws)
    cum_all = np.cumsum(pt)
    pos = np.flatnonzero(raw > 0)
    e = np.asarray(scheme.edges)
    cuts = np.concatenate([[e[pos[0]]], e[pos + 1]])
    # cumulative mass up to edge e[k] is the sum of the tail bin and survey bins < k
    cum = np.concatenate([[cum_all[pos[0]]], cum_all[pos + 1]])
    return _probit_line(cuts, cum)


def estimate_growth_belief(response, scheme=SHIW_SCHEME, m_draws=LIKELIHOOD_TRIALS):
    """Normal belief about income growth from a points response.

    Parameters
    ----------
    response : GrowthResponse or array_like
        Points per bin, lowest bin first.
    scheme : GrowthBinScheme
    m_draws : int
        Trials assumed by the regularization.

    Returns
    -------
    NormalBelief
        On the growth scale; the level belief has mean ``x + mu``.
    """
    return fit_growth_response(response, scheme, m_draws).belief


def estimate_growth_batch(points, scheme=SHIW_SCHEME, m_draws=LIKELIHOOD_TRIALS):
    """Vectorized :func:`fit_growth_response` over rows of ``points``.

    Returns
    -------
    mu, sigma : ndarray
    n_restrictions : ndarray of int
    truncated : ndarray of bool
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    n, J = P.shape
    if J != scheme.n_bins:
        raise ValueError(f"expected {scheme.n_bins} bins, got {J}")
    tot = P.sum(axis=1)
    if np.any(tot <= 0):
        bad = np.flatnonzero(tot <= 0)
        raise DegenerateFitError(f"rows without positive bins: {bad[:10].tolist()}")
    raw = P / tot[:, None]
    full = np.hstack([np.zeros((n, 1)), raw, np.zeros((n, 1))])
    cum_all = np.cumsum(regularize(full, m_draws), axis=1)
    e = np.asarray(scheme.edges)
    pos = raw > 0
    first = np.argmax(pos, axis=1)
    # candidate restrictions: edge e[k] for k = 0..J, used when k is the first
    # positive bin's left edge or the right edge of a positive bin
    use = np.zeros((n, J + 1), bool)
    use[np.arange(n), first] = True
    use[:, 1:] |= pos
    cum = cum_all[:, :J + 1]
    use &= cum < 1.0 - 1e-12
    z = ndtri(np.clip(cum, 1e-300, 1.0 - 1e-16))
    k = use.sum(axis=1)
    if np.any(k < 2):
        bad = np.flatnonzero(k < 2)
        raise DegenerateFitError(f"rows with fewer than 2 restrictions: {bad[:10].tolist()}")
    W = use.astype(float)
    zbar = (W * z).sum(1) / k
    vbar = (W * e[None, :]).sum(1) / k
    zc = (z - zbar[:, None]) * W
    szz = (zc * zc).sum(1)
    szv = (zc * (e[None, :] - vbar[:, None])).sum(1)
    slope = szv / szz
    trunc = slope < 0.0
    sigma = np.where(trunc, 0.0, slope)
    mu = np.where(trunc, vbar, vbar - slope * zbar)
    return mu, sigma, k, trunc


def fit_level_response(response, m_draws=LIKELIHOOD_TRIALS):
    """Log-income belief from a min/max response, with diagnostics."""
    lo, hi, p = response.min_earn, response.max_earn, response.prob_below_mid
    if lo > hi:
        raise ValueError("min_earn exceeds max_earn")
    if lo == hi:
        return BeliefFit(float(np.log(lo)), 0.0, 0, False)
    tail = 1.0 / (2.0 * m_draws + 4.0)
    rest = 1.0 - 2.0 * tail
    cuts = np.log([lo, 0.5 * (lo + hi), hi])
    cum = np.array([tail, tail + p * rest, 1.0 - tail])
    return _probit_line(cuts, cum)


def estimate_level_belief(response, m_draws=LIKELIHOOD_TRIALS):
    """Normal belief about log income from a min/max response.

    The two tails beyond the reported extremes each get probability
    ``1 / (2M + 4)``; the rest is split at the midpoint by the reported
    probability. Coinciding extremes give a point-mass belief.
    """
    return fit_level_response(response, m_draws).belief


def estimate_level_batch(min_earn, max_earn, prob_below_mid, m_draws=LIKELIHOOD_TRIALS):
    """Vectorized :func:`fit_level_response`; returns ``mu, sigma, truncated``."""
    lo = np.asarray(min_earn, dtype=float)
    hi = np.asarray(max_earn, dtype=float)
    p = np.asarray(prob_below_mid, dtype=float)
    if np.any(lo <= 0) or np.any(lo > hi) or np.any((p < 0) | (p > 1)):
        raise ValueError("invalid min/max responses")
    tail = 1.0 / (2.0 * m_draws + 4.0)
    rest = 1.0 - 2.0 * tail
    V = np.log(np.column_stack([lo, 0.5 * (lo + hi), hi]))
    Z = ndtri(np.column_stack([np.full(lo.shape, tail), tail + p * rest, np.full(lo.shape, 1 - tail)]))
    zc = Z - Z.mean(1, keepdims=True)
    slope = (zc * (V - V.mean(1, keepdims=True))).sum(1) / (zc * zc).sum(1)
    trunc = slope < 0.0
    sigma = np.where(trunc, 0.0, slope)
    mu = np.where(trunc, V.mean(1), V.mean(1) - slope * Z.mean(1))
    same = lo == hi
    mu = np.where(same, np.log(lo), mu)
    sigma = np.where(same, 0.0, sigma)
    return mu, sigma, trunc & ~same


def synthesize_minmax(mu, sigma, m_draws=LIKELIHOOD_TRIALS, rng=None, round_to=0.0, prob_step=0.0):
    """Min/max responses from log-income beliefs.

    The extremes are the ``1/(2M+4)`` and ``1 - 1/(2M+4)`` quantiles of the
    belief. The probability is the belief's mass between the minimum and
    the midpoint relative to the mass between the extremes, so that the
    estimator's cumulative probabilities lie on the belief's CDF. Amounts
    and probabilities are optionally rounded to multiples of ``round_to``
    currency units and ``prob_step``. Without rounding the estimator
    recovers the belief exactly.
    """
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    q = -ndtri(1.0 / (2.0 * m_draws + 4.0))
    lo = np.exp(mu - q * sigma)
    hi = np.exp(mu + q * sigma)
    if round_to > 0:
        lo = np.maximum(np.round(lo / round_to), 1.0) * round_to
        hi = np.maximum(np.round(hi / round_to) * round_to, lo)
    with np.errstate(divide="ignore", invalid="ignore"):
        cdf = ndtr((np.log(0.5 * (lo + hi)) - mu) / np.where(sigma > 0, sigma, 1.0))
    tail = 1.0 / (2.0 * m_draws + 4.0)
    p = np.where(sigma > 0, np.clip((cdf - tail) / (1.0 - 2.0 * tail), 0.0, 1.0), 0.5)
    if prob_step > 0:
        p = np.clip(np.round(p / prob_step) * prob_step, 0.0, 1.0)
    return lo, hi, p


# Belief population used to tabulate how many bins respondents fill, fitted
# by simulation so that the mean number of non-empty bins matches
# survey evidence at 5, 10 and 100 draws.
REFERENCE_POPULATION = {"mu_mean": -0.0123, "mu_sd": 0.0257, "log_sigma_mean": -4.285,
                        "log_sigma_sd": 1.184}


def reference_growth_population(n, seed=0, params=None):
    """Growth beliefs ``(mu_g, sigma_g)`` of a synthetic respondent population."""
    p = dict(REFERENCE_POPULATION if params is None else params)
    rng = seeding.derive_rng(seed, seeding.SYNTH)
    mu = p["mu_mean"] + p["mu_sd"] * rng.standard_normal(n)
    sigma = np.exp(p["log_sigma_mean"] + p["log_sigma_sd"] * rng.standard_normal(n))
    return mu, sigma


def nonempty_bin_distribution(mu_g, sigma_g, m_draws, n_sims=1, seed=0, scheme=SHIW_SCHEME):
    """Share of responses with 1..n_bins non-empty bins, and the mean count."""
    counts = np.zeros(scheme.n_bins + 1)
    for s in range(n_sims):
        rng = seeding.derive_rng(seed, seeding.SYNTH, int(m_draws), s)
        pts = synthesize_growth_points(mu_g, sigma_g, m_draws, rng, scheme)
        k = (pts > 0).sum(axis=1)
        counts += np.bincount(k, minlength=scheme.n_bins + 1)
    share = counts[1:] / counts.sum()
    return share, float(np.arange(1, scheme.n_bins + 1) @ share)


# ---------------------------------------------------------------- bias correction

@dataclass(frozen=True, eq=False)
class BiasCorrection:
    """Simulation bias correction of regression coefficients.

    Attributes
    ----------
    names : tuple of str
    coef : ndarray
        Bias-corrected coefficients ``2 * beta_ols - draws.mean(0)``.
    beta_ols : ndarray
        Coefficients on the panel as given.
    draws : ndarray, shape (n_sims, k)
        Coefficients after resynthesizing and re-estimating beliefs.
    m_draws : int or None
    """

    names: tuple
    coef: np.ndarray
    beta_ols: np.ndarray
    draws: np.ndarray
    m_draws: int = None

    @property
    def sim_sd(self):
        """Standard deviation of the simulated coefficients."""
        if len(self.draws) < 2:
            return np.zeros(len(self.names))
        return self.draws.std(axis=0, ddof=1)

    def term(self, name):
        i = self.names.index(name)
        return {"beta_ols": float(self.beta_ols[i]), "beta_bc": float(self.coef[i]),
                "sim_mean": float(self.draws[:, i].mean()), "sim_sd": float(self.sim_sd[i])}


def resynthesize_beliefs(panel, m_draws, rng, scheme=SHIW_SCHEME, m_like=LIKELIHOOD_TRIALS):
    """Re-elicited level beliefs when respondents draw ``m_draws`` times from their fitted beliefs."""
    x = panel.column("x")
    mu_g = panel.column("mu") - x
    sg = np.sqrt(panel.column("sigma2"))
    pts = synthesize_growth_points(mu_g, sg, m_draws, rng, scheme)
    m, s, _, _ = estimate_growth_batch(pts, scheme, m_like)
    return x + m, s ** 2


def bias_correct(panel, spec, m_draws, n_boot=100, seed=0, scheme=SHIW_SCHEME):
    """Bias-corrected coefficients under coarse elicitation with ``m_draws`` draws.

    Each replication treats the panel's fitted beliefs as true, redraws
    every growth response from them, re-estimates beliefs and refits
    ``spec``. With ``m_draws=None`` beliefs are passed through unchanged,
    which leaves the coefficients as they are.

    Parameters
    ----------
    panel : Panel
        Carries fitted beliefs ``belief_mean = x + mu_g`` and
        ``belief_var = sigma_g**2``.
    spec : LinearSpec
    m_draws : int or None
    n_boot : int
        Replications.
    seed : int

    Returns
    -------
    BiasCorrection
    """
    if n_boot < 1:
        raise ValueError("n_boot must be at least 1")
    base = fit_spec(spec, panel)
    draws = np.empty((n_boot, len(base.coef)))
    for s in range(n_boot):
        if m_draws is None:
            draws[s] = base.coef
            continue
        rng = seeding.derive_rng(seed, seeding.BOOTSTRAP, int(m_draws), s)
        mu, s2 = resynthesize_beliefs(panel, m_draws, rng, scheme)
        draws[s] = fit_spec(spec, panel.replace_columns(mu=mu, sigma2=s2)).coef
    coef = 2.0 * base.coef - draws.mean(axis=0)
    return BiasCorrection(tuple(base.names), coef, base.coef, draws, m_draws)


def bias_correction_curve(panel, spec, term="mu", m_grid=(1, 5, 10, 50, 100), n_boot=100, seed=0):
    """Bias-corrected coefficient on ``term`` for each number of draws.

    Returns a frame with columns ``m_draws, beta_ols, beta_bc, sim_mean,
    sim_sd, lower, upper`` where the band is ``beta_bc`` plus or minus two
    simulation SDs.
    """
    rows = []
    for m in m_grid:
        r = bias_correct(panel, spec, m, n_boot, seed).term(term)
        rows.append({"m_draws": int(m), **r})
    df = pd.DataFrame(rows)
    df["lower"] = df["beta_bc"] - 2.0 * df["sim_sd"]
    df["upper"] = df["beta_bc"] + 2.0 * df["sim_sd"]
    return df


# ---------------------------------------------------------------- response files

KEY_COLUMNS = ("household_id", "wave")
BELIEF_COLUMNS = ["household_id", "wave", "format", "growth_mean", "growth_sd", "belief_mean",
                  "belief_var", "n_restrictions", "truncated"]


def detect_format(header):
    cols = set(header)
    if set(GROWTH_COLUMNS) <= cols:
        return "growth"
    if set(MINMAX_COLUMNS) <= cols:
        return "minmax"
    raise DataError("header has neither the growth-bin nor the min/max response columns")


def _parse_row(rec, fmt):
    out = {}
    for k in KEY_COLUMNS:
        v = rec.get(k, "")
        if v is None or v.strip() == "":
            raise ValueError(f"missing {k}")
        out[k] = v.strip()
    if fmt == "growth":
        pts = []
        for c in GROWTH_COLUMNS:
            v = float(rec[c])
            if not np.isfinite(v) or v < 0 or v != round(v):
                raise ValueError(f"{c} must be a nonnegative integer")
            pts.append(int(v))
        if sum(pts) != TOTAL_POINTS:
            raise ValueError(f"points sum to {sum(pts)}, not {TOTAL_POINTS}")
        out.update(zip(GROWTH_COLUMNS, pts))
        for opt in ("log_family_income", "negative_magnitude"):
            v = (rec.get(opt) or "").strip()
            out[opt] = float(v) if v else np.nan
    else:
        r = MinMaxResponse(*(float(rec[c]) for c in MINMAX_COLUMNS))
        out.update(min_earn=r.min_earn, max_earn=r.max_earn, prob_below_mid=r.prob_below_mid)
    return out


def read_responses(path, fmt="auto", lenient=False):
    """Read a survey-response CSV in either format.

    Parameters
    ----------
    path : str or path-like
    fmt : {"auto", "growth", "minmax"}
    lenient : bool
        Skip malformed rows instead of failing.

    Returns
    -------
    frame : DataFrame
        Parsed rows plus their ``line`` number in the file.
    fmt : str
    skipped : list of str
        Messages for rows skipped under ``lenient``.

    Raises
    ------
    DataError
        On the first malformed row, with its line number.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if header is None:
            return pd.DataFrame(columns=list(KEY_COLUMNS) + ["line"]), (None if fmt == "auto" else fmt), []
        header = [h.strip() for h in header]
        reader.fieldnames = header
        fmt = detect_format(header) if fmt == "auto" else fmt
        need = list(KEY_COLUMNS) + list(GROWTH_COLUMNS if fmt == "growth" else MINMAX_COLUMNS)
        missing = [c for c in need if c not in header]
        if missing:
            raise DataError(f"{path}: missing columns {missing}")
        rows, skipped, seen = [], [], set()
        for rec in reader:
            line = reader.line_num
            try:
                if None in rec or any(rec.get(c) is None for c in need):
                    raise ValueError("wrong number of fields")
                row = _parse_row(rec, fmt)
                key = (row["household_id"], row["wave"])
                if key in seen:
                    raise ValueError(f"duplicate household_id/wave {key}")
                seen.add(key)
            except (ValueError, TypeError) as exc:
                msg = f"{path}: line {line}: {exc}"
                if not lenient:
                    raise DataError(msg) from exc
                skipped.append(msg)
                continue
            row["line"] = line
            rows.append(row)
    frame = pd.DataFrame(rows, columns=need + ([] if fmt == "minmax" else
                                                ["log_family_income", "negative_magnitude"]) + ["line"])
    return frame, fmt, skipped


def write_responses(frame, path, fmt):
    cols = list(KEY_COLUMNS) + list(GROWTH_COLUMNS if fmt == "growth" else MINMAX_COLUMNS)
    if fmt == "growth" and "log_family_income" in frame.columns:
        cols.append("log_family_income")
    frame[cols].to_csv(path, index=False, float_format="%.12g", lineterminator="\n", encoding="utf-8")


def estimate_responses(frame, fmt, m_draws=LIKELIHOOD_TRIALS, scheme=SHIW_SCHEME):
    """Fitted beliefs and diagnostics for every parsed response row.

    Growth responses give growth-scale beliefs; the level mean
    ``x + growth_mean`` is filled in when the file carries log income.

    Returns
    -------
    DataFrame
        Columns ``BELIEF_COLUMNS``.
    """
    n = len(frame)
    out = pd.DataFrame({"household_id": frame["household_id"].to_numpy() if n else [],
                        "wave": frame["wave"].to_numpy() if n else []})
    out["format"] = fmt
    if n == 0:
        for c in BELIEF_COLUMNS[3:]:
            out[c] = []
        return out[BELIEF_COLUMNS]
    if fmt == "growth":
        mu, sg, k, tr = estimate_growth_batch(frame[list(GROWTH_COLUMNS)].to_numpy(float), scheme, m_draws)
        x = frame["log_family_income"].to_numpy(float)
        out["growth_mean"], out["growth_sd"] = mu, sg
        out["belief_mean"], out["belief_var"] = x + mu, sg ** 2
    else:
        lo, hi = frame["min_earn"].to_numpy(float), frame["max_earn"].to_numpy(float)
        mu, sg, tr = estimate_level_batch(lo, hi, frame["prob_below_mid"].to_numpy(float), m_draws)
        k = np.where(lo == hi, 0, 3)
        out["growth_mean"], out["growth_sd"] = np.nan, np.nan
        out["belief_mean"], out["belief_var"] = mu, sg ** 2
    out["n_restrictions"] = np.asarray(k, int)
    out["truncated"] = np.asarray(tr, bool).astype(int)
    return out[BELIEF_COLUMNS]
