import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beliefape.counterfactuals import (CELLS, CSV_COLUMNS, ApeResult, CounterfactualStates,
                                       TaxSchedule, anchor_mean_gross, baseline_schedule,
                                       bootstrap_ape, gross_from_net, income_quintiles,
                                       net_income, permanent_states, plug_in_ape,
                                       regressivity_states, revenue_neutral_lambda, shift_states,
                                       shift_states_via_beliefs, transitory_states)
from beliefape.econometrics import LinearSpec, Panel, fit_spec


def test_net_income_examples():
    flat = TaxSchedule(0.8, 0.0, 50_000.0)
    assert net_income(30_000.0, flat) == pytest.approx(24_000.0)
    base = TaxSchedule(0.94, 0.196, 40_000.0)
    assert net_income(40_000.0, base) == pytest.approx(0.94 * 40_000.0, rel=1e-12)
    g = np.linspace(1_000, 200_000, 500)
    n = net_income(g, base)
    assert np.all(np.diff(n) > 0)
    assert np.all(np.diff(n, 2) < 0)
    with pytest.raises(ValueError):
        net_income(0.0, base)
    with pytest.raises(ValueError):
        TaxSchedule(0.9, 1.0)


@given(st.floats(100, 1e6), st.floats(0.3, 1.2), st.floats(0, 0.6), st.floats(1e3, 1e5))
def test_gross_net_roundtrip(g, lam, tau, K):
    t = TaxSchedule(lam, tau, K)
    assert gross_from_net(net_income(g, t), t) == pytest.approx(g, rel=1e-10)


def _panel(x, mu, s2, y=None):
    n = len(x)
    return Panel(pd.DataFrame({
        "household_id": np.arange(n) // 2, "wave": np.arange(n) % 2,
        "log_consumption": np.zeros(n) if y is None else y, "log_family_income": x,
        "belief_mean": mu, "belief_var": s2, "log_assets": np.ones(n), "age": np.full(n, 40.0),
        "weight": np.ones(n)}))


def test_shift_states_null_and_permanent():
    rng = np.random.default_rng(0)
    x = 10 + 0.5 * rng.standard_normal(200)
    p = _panel(x, x + 0.02, np.full(200, 0.06))
    t0 = TaxSchedule(0.94, 0.196, 35_000.0)
    null = shift_states(p, t0, t0)
    assert np.allclose(null.x1, x, atol=1e-12) and np.allclose(null.mu1, x + 0.02, atol=1e-12)
    perm = shift_states(p, t0, TaxSchedule(0.84, 0.196, 35_000.0))
    d = np.log(0.84 / 0.94)
    assert np.allclose(perm.x1 - x, d, atol=1e-12)
    assert np.allclose(perm.mu1 - (x + 0.02), d, atol=1e-12)
    assert np.allclose(perm.sigma2_1, 0.06, atol=1e-15)


def test_shift_states_regressivity_pivot():
    x = np.linspace(8.5, 12.0, 100)
    p = _panel(x, x, np.full(100, 0.06))
    t0 = baseline_schedule(p)
    st1 = regressivity_states(p, t0)
    dx = st1.x1 - x
    assert dx[0] < 0 < dx[-1]
    assert np.all(np.diff(dx) > 0)


@pytest.mark.parametrize("tau1,share", [(0.142, 1.0), (0.25, 1.0), (0.142, 0.6), (0.05, 0.3)])
def test_shift_states_matches_belief_route(tau1, share):
    rng = np.random.default_rng(3)
    x = 10 + 0.4 * rng.standard_normal(50)
    p = _panel(x, x + 0.1 * rng.standard_normal(50), rng.uniform(0.01, 0.2, 50))
    t0 = TaxSchedule(0.94, 0.196, 30_000.0)
    t1 = TaxSchedule(0.9, tau1, 30_000.0)
    a = shift_states(p, t0, t1, share)
    b = shift_states_via_beliefs(p, t0, t1, share)
    assert np.max(np.abs(a.x1 - b.x1)) < 1e-10
    assert np.max(np.abs(a.mu1 - b.mu1)) < 1e-10
    assert np.max(np.abs(a.sigma2_1 - b.sigma2_1)) < 1e-10


def test_shift_states_rejects_bad_shares():
    p = _panel(np.full(4, 10.0), np.full(4, 10.0), np.full(4, 0.1))
    t = TaxSchedule(0.94, 0.196)
    with pytest.raises(ValueError):
        shift_states(p, t, t, 0.0)
    with pytest.raises(ValueError):
        CounterfactualStates(np.zeros(2), np.zeros(2), np.array([0.1, -0.1]))


def test_anchor_mean_gross_is_fixed_point():
    rng = np.random.default_rng(1)
    x = 10 + 0.6 * rng.standard_normal(1000)
    K = anchor_mean_gross(x, 0.94, 0.196)
    t = TaxSchedule(0.94, 0.196, K)
    assert gross_from_net(np.exp(x), t).mean() == pytest.approx(K, rel=1e-10)


@pytest.mark.parametrize("tau1", [0.142, 0.10, 0.30])
def test_revenue_neutral_lambda_monte_carlo(tau1):
    t0 = TaxSchedule(0.94, 0.196, 40_000.0)
    mu_x, sd_x = 10.2, 0.55
    lt1 = revenue_neutral_lambda(t0, tau1, mu_x, sd_x)
    t1 = TaxSchedule.from_lambda_tilde(lt1, tau1, 40_000.0)
    rng = np.random.default_rng(99)
    net0 = np.exp(rng.normal(mu_x, sd_x, 1_000_000))
    gross = gross_from_net(net0, t0)
    rev0 = np.mean(gross - net0)
    rev1 = np.mean(gross - net_income(gross, t1))
    assert abs(rev1 / rev0 - 1.0) < 0.002


def test_revenue_neutral_lambda_trivial_cases():
    t0 = TaxSchedule(0.94, 0.196, 40_000.0)
    assert revenue_neutral_lambda(t0, 0.196, 10.0, 0.5) == pytest.approx(t0.lambda_tilde, rel=1e-12)
    x = 10.3
    lt1 = revenue_neutral_lambda(t0, 0.1, x, 0.0)
    g = gross_from_net(np.exp(x), t0)
    assert net_income(g, TaxSchedule.from_lambda_tilde(lt1, 0.1, 40_000.0)) == pytest.approx(np.exp(x), rel=1e-10)


def test_income_quintiles_weighted_and_tie_broken():
    x = np.array([1.0, 1.0, 1.0, 1.0, 1.0, 2, 3, 4, 5, 6])
    hh = np.array([9, 8, 7, 6, 5, 4, 3, 2, 1, 0])
    q = income_quintiles(x, np.ones(10), hh)
    assert np.array_equal(np.bincount(q, minlength=5), [2, 2, 2, 2, 2])
    # ties broken by household id: ids 5 and 6 come first
    assert q[4] == 0 and q[3] == 0 and q[0] == 2
    q2 = income_quintiles(np.arange(5.0), np.array([4.0, 1, 1, 1, 1]), np.arange(5))
    assert q2[0] == 1 and q2[-1] == 4


def _linear_fit_panel(bx, bmu, n=400, seed=0):
    rng = np.random.default_rng(seed)
    x = 10 + 0.5 * rng.standard_normal(n)
    mu = x + 0.05 * rng.standard_normal(n)
    y = bx * x + bmu * mu
    return _panel(x, mu, np.full(n, 0.05), y)


def test_plug_in_linear_shift():
    p = _linear_fit_panel(0.3, 0.5)
    fit = fit_spec(LinearSpec(("x", "mu")), p)
    d = -0.1
    st_ = CounterfactualStates(p.column("x") + d, p.column("mu") + d, p.column("sigma2"), "perm")
    r = plug_in_ape(fit, p, st_)
    for c in CELLS:
        e = r.cell(c)
        assert e["cape"] == pytest.approx(0.3 * d, abs=1e-10)
        assert e["dape"] == pytest.approx(0.5 * d, abs=1e-10)
        assert e["tape"] == pytest.approx(0.8 * d, abs=1e-10)
    null = plug_in_ape(fit, p, CounterfactualStates.unchanged(p))
    assert np.all(null.estimates() == 0.0)


def test_plug_in_dape_at_baseline_income_and_transitory():
    rng = np.random.default_rng(5)
    p0 = _linear_fit_panel(0.3, 0.5, seed=1)
    y = p0.column("y") + 0.2 * p0.column("x") * p0.column("mu") / 10
    p = p0.replace_columns(y=y)
    fit = fit_spec(LinearSpec(("x", "mu", "x:mu"), center=("x", "mu")), p)
    st_ = permanent_states(p)
    a = plug_in_ape(fit, p, st_)
    b = plug_in_ape(fit, p, st_, dape_at_x0=True)
    assert a.pooled["cape"] == b.pooled["cape"]
    assert a.pooled["dape"] != pytest.approx(b.pooled["dape"], abs=1e-8)
    t = plug_in_ape(fit, p, transitory_states(p), transitory=True)
    assert np.array_equal(t.table["dape"], np.zeros(len(CELLS)))
    assert np.allclose(a.table["tape"] - t.table["tape"], a.table["dape"], atol=1e-15)


def test_plug_in_rejects_mismatched_panel():
    p = _linear_fit_panel(0.3, 0.5)
    with_size = Panel(p.frame.assign(hh_size=np.arange(len(p)) % 3 + 1.0))
    fit = fit_spec(LinearSpec(("x", "mu", "hh_size")), with_size)
    with pytest.raises(ValueError, match="lacks a column"):
        plug_in_ape(fit, p, CounterfactualStates.unchanged(p))


def test_regressivity_null_change_is_zero(panel):
    fit = fit_spec(LinearSpec(("x", "mu", "x:mu", "z"), first_difference=True, center=("x", "mu")), panel)
    t0 = baseline_schedule(panel)
    r = plug_in_ape(fit, panel, regressivity_states(panel, t0, tau1=t0.tau))
    assert np.max(np.abs(r.estimates())) < 1e-12


def test_regressivity_sign_pattern(panel):
    fit = fit_spec(LinearSpec(("x", "mu", "z"), first_difference=True), panel)
    r = plug_in_ape(fit, panel, regressivity_states(panel))
    tape = r.table.set_index("cell")["tape"]
    assert tape["q1"] < 0 < tape["q5"]
    assert np.all(np.diff(tape[["q1", "q2", "q3", "q4", "q5"]].to_numpy()) > 0)


def test_ape_result_csv_roundtrip(tmp_path):
    r = ApeResult.from_effects(CELLS, np.arange(6.0), -np.arange(6.0) / 3, "permanent", "fd", 7,
                               se=np.ones((6, 3)))
    path = tmp_path / "ape.csv"
    r.to_csv(path)
    back = pd.read_csv(path)
    assert list(back.columns) == CSV_COLUMNS
    assert np.allclose(back["cape"] + back["dape"], back["tape"], atol=0)
    pdata = r.plot_data()
    assert len(pdata) == 15 and set(pdata["mode"]) == {"cape", "dape", "tape"}


@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6), st.lists(st.floats(-1, 1), min_size=6, max_size=6))
def test_decomposition_identity_exact(c, d):
    r = ApeResult.from_effects(CELLS, c, d)
    e = r.estimates()
    assert np.array_equal(e[:, 0] + e[:, 1], e[:, 2])


def test_bootstrap_contract(panel):
    with pytest.raises(ValueError):
        bootstrap_ape(lambda p, s: None, panel, 0)
    const = lambda p, s: ApeResult.from_effects(CELLS, np.ones(6), np.ones(6))
    se, draws = bootstrap_ape(const, panel, 5)
    assert np.all(se == 0) and draws.shape == (5, 6, 3)
    se1, _ = bootstrap_ape(const, panel, 1)
    assert np.all(se1 == 0)


def test_bootstrap_threads_do_not_change_results(panel):
    def pipe(p, s):
        m = np.average(p.column("y"), weights=p.weight)
        return ApeResult.from_effects(CELLS, np.full(6, m), np.zeros(6))
    a, _ = bootstrap_ape(pipe, panel, 8, seed=4)
    b, _ = bootstrap_ape(pipe, panel, 8, seed=4, workers=3)
    assert np.array_equal(a, b)


def test_bootstrap_se_nested_monte_carlo():
    # mean of a clustered outcome: bootstrap SE vs the sampling SD across outer samples
    n_h, T, outer, inner = 60, 2, 200, 40
    ests, ses = [], []
    for o in range(outer):
        rng = np.random.default_rng(1000 + o)
        a = np.repeat(rng.standard_normal(n_h), T)
        y = a + 0.5 * rng.standard_normal(n_h * T)
        p = _panel(np.full(n_h * T, 10.0), np.full(n_h * T, 10.0), np.full(n_h * T, 0.1), y)

        def pipe(b, s):
            m = b.column("y").mean()
            return ApeResult.from_effects(("pooled",), [m], [0.0])
        ests.append(pipe(p, 0).pooled["cape"])
        ses.append(bootstrap_ape(pipe, p, inner, seed=o)[0][0, 0])
    true_sd = np.std(ests, ddof=1)
    assert abs(np.mean(ses) / true_sd - 1.0) < 0.15
