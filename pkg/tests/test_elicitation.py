import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from beliefape.beliefs import NormalBelief
from beliefape.econometrics import LinearSpec
from beliefape.elicitation import (GROWTH_COLUMNS, SHIW_SCHEME, GrowthBinScheme, GrowthResponse,
                                   MinMaxResponse, bias_correct, estimate_growth_batch,
                                   estimate_growth_belief, estimate_level_batch,
                                   estimate_level_belief, estimate_responses, fit_growth_response,
                                   fit_level_response, largest_remainder, read_responses,
                                   regularize, select_active_bins, synthesize_growth_points,
                                   synthesize_growth_response, synthesize_minmax)
from beliefape.errors import DataError, DegenerateFitError


def _points(**bins):
    labels = [c[2:] for c in GROWTH_COLUMNS]
    p = np.zeros(12, int)
    for k, v in bins.items():
        p[labels.index(k)] = v
    return p


def test_scheme_has_fourteen_bins():
    assert SHIW_SCHEME.n_bins == 12 and SHIW_SCHEME.n_total == 14
    assert SHIW_SCHEME.edges[0] == -0.10 and SHIW_SCHEME.edges[-1] == 0.35
    with pytest.raises(ValueError):
        GrowthBinScheme((0.0, 0.1, 0.05))


def test_regularize_examples():
    p = np.zeros(12)
    p[0] = 1.0
    r = regularize(p, 100)
    assert r[0] == pytest.approx(1.005 / 1.06, abs=1e-12)
    assert r[0] == pytest.approx(0.94811, abs=5e-6)
    assert r[1] == pytest.approx(0.005 / 1.06, abs=1e-12)
    u = np.full(12, 1 / 12)
    assert np.allclose(regularize(u, 100), u, atol=1e-15)


@given(st.lists(st.floats(0, 1), min_size=2, max_size=20).filter(lambda v: sum(v) > 0), st.integers(1, 500))
def test_regularize_is_interior_distribution(v, m):
    p = np.asarray(v) / sum(v)
    r = regularize(p, m)
    assert r.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all((r > 0) & (r < 1))


def test_select_active_bins_examples():
    iv = select_active_bins(_points(**{"5_6": 60, "6_7": 40}) / 100)
    assert iv == [(-np.inf, 0.05), (0.05, 0.06), (0.06, 0.07), (0.07, np.inf)]
    assert len(select_active_bins(_points(**{"3_5": 100}) / 100)) == 3
    full = select_active_bins(np.full(12, 1 / 12))
    assert len(full) == 14 and full[1] == (-0.10, 0.0) and full[-2] == (0.25, 0.35)
    with pytest.raises(DegenerateFitError):
        select_active_bins(np.zeros(12))


def test_worked_example_matches_normal_equations():
    pts = _points(**{"5_6": 60, "6_7": 40})
    fit = fit_growth_response(GrowthResponse(tuple(pts)))
    h = 0.5 / 100
    d = 1 + 14 * h
    # full scheme: tail, <0, 0-3, 3-5, 5-6, 6-7, ..., tail
    c = np.array([4 * h, 5 * h + 0.6, 6 * h + 1.0]) / d
    v = np.array([0.05, 0.06, 0.07])
    X = np.column_stack([np.ones(3), norm.ppf(c)])
    mu, sigma = np.linalg.lstsq(X, v, rcond=None)[0]
    assert fit.n_restrictions == 3 and not fit.truncated
    assert fit.mu == pytest.approx(mu, abs=1e-12)
    assert fit.sigma == pytest.approx(sigma, abs=1e-12)


def test_symmetric_response_centered_on_edge():
    scheme = GrowthBinScheme(tuple(np.linspace(-0.06, 0.06, 13)))
    pts = np.zeros(12, int)
    pts[5] = pts[6] = 50
    b = estimate_growth_belief(pts, scheme)
    assert b.mu == pytest.approx(0.0, abs=1e-12)


def test_growth_fit_rejects_bad_input():
    with pytest.raises(ValueError):
        GrowthResponse(tuple([50, 40] + [0] * 10))
    with pytest.raises(DegenerateFitError):
        fit_growth_response(np.zeros(12))


@given(st.lists(st.integers(0, 30), min_size=12, max_size=12).filter(lambda v: sum(v) > 0),
       st.integers(1, 50))
def test_growth_fit_scale_invariant(v, c):
    a = fit_growth_response(np.asarray(v))
    b = fit_growth_response(np.asarray(v) * c)
    assert a.mu == b.mu and a.sigma == b.sigma


@settings(max_examples=50)
@given(st.lists(st.lists(st.integers(0, 20), min_size=12, max_size=12).filter(lambda v: sum(v) > 0),
                min_size=1, max_size=8))
def test_growth_batch_matches_single(rows):
    P = np.asarray(rows)
    mu, sg, k, tr = estimate_growth_batch(P)
    for i, r in enumerate(P):
        f = fit_growth_response(r)
        assert mu[i] == pytest.approx(f.mu, abs=1e-12)
        assert sg[i] == pytest.approx(f.sigma, abs=1e-12)
        assert k[i] == f.n_restrictions and tr[i] == f.truncated


def test_truncation_flag_on_negative_slope():
    # mass split between far-apart bins gives an increasing fit; a reversed
    # cumulative ordering is impossible, so check that sigma is never negative
    mu, sg, _, tr = estimate_growth_batch(np.eye(12, dtype=int) * 100)
    assert np.all(sg >= 0)


@given(st.lists(st.integers(0, 1000), min_size=1, max_size=14).filter(lambda v: sum(v) > 0))
def test_largest_remainder_sums_to_total(v):
    out = largest_remainder(np.asarray(v))
    assert out.sum() == 100 and np.all(out >= 0)
    exact = np.asarray(v) * 100 / sum(v)
    assert np.all(np.abs(out - exact) < 1)


def test_point_mass_synthesis():
    for m in (1, 5, 100):
        r = synthesize_growth_response(NormalBelief(0.04, 0.0), m, seed=m)
        assert r.points == tuple(_points(**{"3_5": 100}))


def test_growth_recovery_monte_carlo():
    # 1000 respondents drawn from N(0.04, 0.01^2) with 100 draws each
    rng = np.random.default_rng(2024)
    pts = synthesize_growth_points(np.full(1000, 0.04), 0.01, 100, rng)
    mu, sg, _, _ = estimate_growth_batch(pts)
    assert abs(mu.mean() - 0.04) < 0.002
    print(f"sigma_g recovery: mean {sg.mean():.4f} vs 0.0100")


def test_level_belief_examples():
    b = estimate_level_belief(MinMaxResponse(20_000.0, 20_000.0, 0.3))
    assert b.mu == pytest.approx(np.log(20_000.0)) and b.sigma2 == 0.0
    r = MinMaxResponse(np.exp(9.0), np.exp(10.0), 0.5)
    f = fit_level_response(r)
    v = np.log([r.min_earn, 0.5 * (r.min_earn + r.max_earn), r.max_earn])
    assert f.mu == pytest.approx(v.mean(), abs=1e-12)
    with pytest.raises(ValueError):
        MinMaxResponse(2.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        MinMaxResponse(1.0, 2.0, 1.5)


def test_level_fit_uses_tail_mass():
    r = MinMaxResponse(18_000.0, 30_000.0, 0.4)
    f = fit_level_response(r, 100)
    t = 1 / 204
    c = np.array([t, t + 0.4 * (1 - 2 * t), 1 - t])
    v = np.log([18_000.0, 24_000.0, 30_000.0])
    X = np.column_stack([np.ones(3), norm.ppf(c)])
    assert np.allclose([f.mu, f.sigma], np.linalg.lstsq(X, v, rcond=None)[0], atol=1e-12)


def test_level_recovery_exact_without_rounding():
    rng = np.random.default_rng(7)
    mu = 10 + 0.5 * rng.standard_normal(500)
    sg = rng.uniform(0.01, 0.3, 500)
    lo, hi, p = synthesize_minmax(mu, sg)
    m, s, tr = estimate_level_batch(lo, hi, p)
    assert np.max(np.abs(m - mu)) < 1e-10 and np.max(np.abs(s - sg)) < 1e-10
    for i in range(5):
        f = fit_level_response(MinMaxResponse(lo[i], hi[i], p[i]))
        assert f.mu == pytest.approx(m[i], abs=1e-12) and f.sigma == pytest.approx(s[i], abs=1e-12)


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_read_responses_line_numbers(tmp_path):
    hdr = "household_id,wave," + ",".join(GROWTH_COLUMNS) + ",log_family_income\n"
    good = "1,0," + ",".join(map(str, _points(**{"5_6": 60, "6_7": 40}))) + ",10\n"
    bad = "2,0," + ",".join(map(str, _points(**{"5_6": 60, "6_7": 30}))) + ",10\n"
    p = _write(tmp_path / "g.csv", hdr + good + bad)
    with pytest.raises(DataError, match="line 3"):
        read_responses(p)
    frame, fmt, skipped = read_responses(p, lenient=True)
    assert fmt == "growth" and len(frame) == 1 and "line 3" in skipped[0]
    out = estimate_responses(frame, fmt)
    assert out.loc[0, "n_restrictions"] == 3 and out.loc[0, "truncated"] == 0
    assert out.loc[0, "belief_mean"] == pytest.approx(10 + out.loc[0, "growth_mean"])


def test_read_minmax_and_empty(tmp_path):
    p = _write(tmp_path / "m.csv", "household_id,wave,min_earn,max_earn,prob_below_mid\n"
                                   "1,0,20000,20000,0.5\n1,1,18000,30000,0.4\n")
    frame, fmt, _ = read_responses(p)
    out = estimate_responses(frame, fmt)
    assert fmt == "minmax" and out.loc[0, "belief_var"] == 0.0 and out.loc[0, "n_restrictions"] == 0
    e = _write(tmp_path / "e.csv", "")
    frame, fmt, _ = read_responses(e)
    assert len(frame) == 0 and fmt is None
    h = _write(tmp_path / "h.csv", "household_id,wave,min_earn,max_earn,prob_below_mid\n")
    frame, fmt, _ = read_responses(h)
    assert len(estimate_responses(frame, fmt)) == 0
    d = _write(tmp_path / "d.csv", "household_id,wave,min_earn,max_earn,prob_below_mid\n"
                                   "1,0,20000,25000,0.5\n1,0,20000,25000,0.5\n")
    with pytest.raises(DataError, match="line 3: duplicate"):
        read_responses(d)
    x = _write(tmp_path / "x.csv", "household_id,wave,min_earn,max_earn,prob_below_mid\n1,0,abc,2,0.5\n")
    with pytest.raises(DataError, match="line 2"):
        read_responses(x)


def test_bias_correct_without_resynthesis_is_identity(panel):
    spec = LinearSpec(("x", "mu", "z"), first_difference=True)
    bc = bias_correct(panel, spec, None, n_boot=3)
    assert np.allclose(bc.coef, bc.beta_ols, rtol=0, atol=1e-13)


def test_bias_correct_deterministic(panel):
    spec = LinearSpec(("x", "mu", "z"), first_difference=True)
    a = bias_correct(panel, spec, 10, n_boot=4, seed=3)
    b = bias_correct(panel, spec, 10, n_boot=4, seed=3)
    assert np.array_equal(a.coef, b.coef)
    assert np.allclose(a.coef, 2 * a.beta_ols - a.draws.mean(0), atol=0)
    with pytest.raises(ValueError):
        bias_correct(panel, spec, 10, n_boot=0)
