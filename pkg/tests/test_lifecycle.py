import numpy as np
import pytest
from scipy.optimize import brentq

from beliefape.counterfactuals import TaxSchedule
from beliefape.lifecycle import (Adaptive, GridSpec, LifecycleModel, PensionRule, gross_from_net,
                                 pension_benefit, pension_income, simulate, solve, structural_tape)


@pytest.fixture(scope="module")
def small_solution(small_model):
    return solve(small_model)


@pytest.fixture(scope="module")
def small_sim(small_model, small_solution):
    return simulate(small_solution, small_model, 3000, seed=5)


def test_gross_from_net_examples():
    t = TaxSchedule.from_lambda_tilde(3.826, 0.137)
    assert gross_from_net(3.826, t) == pytest.approx(1.0, rel=1e-14)
    oracle = brentq(lambda g: 3.826 * g ** (1 - 0.137) - 2.0, 1e-6, 10.0, xtol=1e-15)
    assert gross_from_net(2.0, t) == pytest.approx(oracle, rel=1e-12)
    assert gross_from_net(2.0, t) == pytest.approx(0.4716, abs=5e-5)
    assert gross_from_net(2.0, TaxSchedule.from_lambda_tilde(3.826, 0.0)) == pytest.approx(2.0 / 3.826)
    with pytest.raises(ValueError):
        gross_from_net(0.0, t)


def test_pension_formula(small_model):
    m = small_model
    K = m.mean_gross
    assert pension_income(0.0, m) == 0.0 and pension_benefit(0.0, m) == 0.0
    assert pension_benefit(0.18 * K, m, scaled=False) == pytest.approx(0.90 * 0.18 * K, rel=1e-14)
    seg2 = 0.90 * 0.18 * K + 0.32 * (1.10 - 0.18) * K
    assert pension_benefit(1.10 * K, m, scaled=False) == pytest.approx(seg2, rel=1e-14)
    cap = 2.2 * K
    above = pension_benefit(np.array([cap, 1.5 * cap, 3 * cap]), m)
    assert np.ptp(above) == 0.0
    ref = m.mean_gross_late
    assert pension_benefit(ref, m) == pytest.approx(0.45 * ref, rel=1e-12)
    a = np.linspace(0.0, 3 * K, 200)
    assert np.all(np.diff(pension_income(a, m)) >= 0)
    with pytest.raises(ValueError):
        pension_benefit(-1.0, m)


def test_pension_taxes_only_taxable_share(small_model):
    m = small_model
    pre = pension_benefit(m.mean_gross, m)
    t = m.tax
    expect = 0.15 * pre + t.lambda_tilde * (0.85 * pre) ** (1 - t.tau)
    assert pension_income(m.mean_gross, m) == pytest.approx(expect, rel=1e-12)


def test_model_validation():
    with pytest.raises(ValueError):
        LifecycleModel(T_ret=80)
    with pytest.raises(ValueError):
        LifecycleModel(kappa=np.zeros(3))
    with pytest.raises(ValueError):
        LifecycleModel(gamma=0.0)
    with pytest.raises(ValueError):
        PensionRule(rates=(0.3, 0.5, 0.1))
    with pytest.raises(ValueError):
        PensionRule(bend1=1.2)
    with pytest.raises(ValueError):
        GridSpec(n_assets=2)
    with pytest.raises(ValueError):
        Adaptive(var_u=-1.0)


def test_terminal_period_consumes_cash(small_model, small_solution):
    cash = np.linspace(1e3, 1e6, 50)
    p = np.full(50, 2e4)
    c = small_solution.retired_consumption(small_model.T - 1, cash, p)
    assert np.allclose(c, cash, rtol=1e-10)


def test_two_period_euler_equalizes_consumption():
    grid = GridSpec(n_assets=400, n_beliefs=3, n_pension=80, n_quad=1, n_retire=400)
    m = LifecycleModel(T=2, T_ret=1, T_cont=0, kappa=np.array([10.5]), var_eta1=0.0, var_v=0.0,
                       var_eps=0.0, grid=grid)
    sol = solve(m)
    sim = simulate(sol, m, 1, seed=0)
    c0, c1 = sim.consumption[0]
    assert sim.assets[0, 1] > 0
    assert c0 == pytest.approx(c1, rel=1e-4)


def test_policy_is_feasible_and_monotone(small_model, small_solution):
    cash = np.linspace(100.0, 4e5, 400)
    for t in (0, 10, 30, 34):
        for b in small_solution.belief_grid[::4]:
            c = small_solution.working_consumption(t, cash, b, np.full(400, small_model.mean_gross))
            assert np.all(c > 0) and np.all(c <= cash + 1e-9)
            assert np.all(np.diff(c) >= -1e-9 * c[1:])


def test_simulation_budget_identity(small_sim, small_model):
    s = small_sim
    R = small_model.R
    assert np.allclose(s.cash, R * s.assets + s.income, rtol=1e-13)
    assert np.array_equal(s.assets[:, 1:], s.end_assets[:, :-1])
    assert np.allclose(s.end_assets, s.cash - s.consumption, rtol=1e-13, atol=1e-8)
    assert np.all(s.assets >= 0) and np.all(s.end_assets >= -1e-9)
    assert np.all(s.assets[:, 0] == 0)


def test_belief_variance_constant(small_sim):
    bv = small_sim.belief_var[:, :34]
    assert np.all(bv == pytest.approx(0.06, abs=1e-15))
    assert np.all(np.isnan(small_sim.belief_var[:, 34:]))


def test_simulation_deterministic_and_empty(small_model, small_solution, small_sim):
    again = simulate(small_solution, small_model, 3000, seed=5)
    assert np.array_equal(again.consumption, small_sim.consumption)
    empty = simulate(small_solution, small_model, 0, seed=5)
    assert empty.n_households == 0 and len(empty.to_frame()) == 0


def test_deterministic_economy_has_no_dispersion():
    m = LifecycleModel(grid=GridSpec(n_assets=40, n_beliefs=5, n_pension=5, n_quad=3, n_retire=80),
                       var_eta1=0.0, var_v=0.0, var_eps=0.0,
                       expectations=Adaptive(gain=0.5, var_u=0.0))
    sim = simulate(solve(m), m, 50, seed=1)
    assert np.all(np.ptp(sim.consumption, axis=0) == 0.0)


def test_asset_profile_hump(small_sim):
    prof = small_sim.age_profiles()
    peak = int(prof["age"][np.argmax(prof["mean_assets"])])
    assert 50 <= peak <= 65
    assert prof["mean_assets"].iloc[-1] < 0.5 * prof["mean_assets"].max()


def test_panel_frame(small_sim):
    f = small_sim.to_frame()
    assert np.all(np.isfinite(f.to_numpy(float)))
    assert f["age"].min() >= 26 and f["age"].max() <= 58


def test_structural_null_tax(small_model, small_solution, small_sim):
    r = structural_tape(small_model, 0.0, baseline=small_solution, panel=small_sim)
    assert [r.pooled[k] for k in ("cape", "dape", "tape")] == [0.0, 0.0, 0.0]
    assert np.all(r.by_age[["cape", "dape", "tape"]].to_numpy() == 0.0)


def test_structural_adaptive_and_rational_signs(small_model, small_solution, small_sim):
    r = structural_tape(small_model, 0.10, baseline=small_solution, panel=small_sim)
    p = r.pooled
    assert p["cape"] < 0 and p["dape"] < 0 and p["tape"] == pytest.approx(p["cape"] + p["dape"], abs=1e-15)
    with pytest.raises(ValueError):
        structural_tape(small_model, 1.0, baseline=small_solution, panel=small_sim)
