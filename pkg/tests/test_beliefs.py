import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from beliefape.beliefs import (XI_INFINITE, AffineIncomeMap, BayesState, NormalBelief,
                               adaptive_update, bayes_update, kl_normal, shift_full, shift_kl)

finite = st.floats(-20, 20, allow_nan=False)
var = st.floats(1e-4, 5.0)


def _expected_logpdf(m, s2, a, b):
    # E_{N(m, s2)} log N(x; a, b)
    return -0.5 * (np.log(2 * np.pi * b) + (s2 + (m - a) ** 2) / b)


def _numeric_shift(mu, s2, delta, xi):
    def neg(theta):
        a, lb = theta
        b = np.exp(lb)
        kl = 0.5 * (np.log(b / s2) + (s2 + (mu - a) ** 2) / b - 1.0)
        return -(_expected_logpdf(mu + delta, s2, a, b) - xi * kl)
    r = minimize(neg, [mu, np.log(s2)], method="BFGS", options={"gtol": 1e-12})
    r = minimize(neg, r.x, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 20000})
    return r.x[0], np.exp(r.x[1])


@pytest.mark.parametrize("mu,s2,delta,xi", [
    (0.0, 1.0, -0.1, 0.0), (10.0, 0.06, -0.105, 1.0), (9.5, 0.2, 0.3, 4.0), (1.0, 0.5, -1.0, 0.25)])
def test_shift_kl_matches_numeric_maximizer(mu, s2, delta, xi):
    b = shift_kl(NormalBelief(mu, s2), delta, xi)
    m_num, v_num = _numeric_shift(mu, s2, delta, xi)
    assert abs(b.mu - m_num) < 1e-6
    assert abs(b.sigma2 - v_num) < 1e-6


def test_shift_kl_limits():
    b = NormalBelief(1.0, 0.3)
    assert shift_kl(b, 0.2, 0.0) == NormalBelief(1.2, 0.3)
    assert shift_kl(b, 0.2, XI_INFINITE) is b
    with pytest.raises(ValueError):
        shift_kl(b, 0.2, -1.0)
    with pytest.raises(ValueError):
        shift_kl(b, 0.2, np.inf)


@given(finite, var, st.floats(-2, 2), st.floats(0, 50))
def test_shift_kl_mean_between_old_and_full(mu, s2, delta, xi):
    b = shift_kl(NormalBelief(mu, s2), delta, xi)
    lo, hi = sorted([mu, mu + delta])
    assert lo - 1e-9 <= b.mu <= hi + 1e-9
    assert b.sigma2 >= s2 - 1e-12


def test_shift_full_pushforward_by_sampling(rng):
    b = NormalBelief(9.8, 0.06)
    f = AffineIncomeMap(0.4, 0.9)
    out = shift_full(b, f)
    x = f(rng.normal(b.mu, b.sd, 400_000))
    assert abs(x.mean() - out.mu) < 4 * out.sd / np.sqrt(len(x))
    assert abs(x.var() - out.sigma2) < 0.01 * out.sigma2


@given(finite, var, st.floats(-3, 3), st.floats(0.1, 3), st.floats(-3, 3), st.floats(0.1, 3))
def test_shift_full_composes(mu, s2, a1, b1, a2, b2):
    f, g = AffineIncomeMap(a1, b1), AffineIncomeMap(a2, b2)
    one = shift_full(shift_full(NormalBelief(mu, s2), f), g)
    two = shift_full(NormalBelief(mu, s2), f.then(g))
    assert one.mu == pytest.approx(two.mu, abs=1e-9)
    assert one.sigma2 == pytest.approx(two.sigma2, rel=1e-9)


def test_kl_normal_orientation_and_zero():
    p, q = NormalBelief(0.0, 2.0), NormalBelief(1.0, 0.5)
    # E_q[log q - log p] by quadrature
    x, w = np.polynomial.hermite_e.hermegauss(80)
    xs = q.mu + q.sd * x
    ref = np.sum(w * (q.logpdf(xs) - p.logpdf(xs))) / np.sqrt(2 * np.pi)
    assert kl_normal(p, q) == pytest.approx(ref, rel=1e-10)
    assert kl_normal(q, q) == 0.0
    assert kl_normal(p, q) != pytest.approx(kl_normal(q, p))


def test_belief_validation():
    with pytest.raises(ValueError):
        NormalBelief(0.0, -1.0)
    with pytest.raises(ValueError):
        NormalBelief(np.nan, 1.0)
    with pytest.raises(ValueError):
        AffineIncomeMap(0.0, 0.0)
    with pytest.raises(ValueError):
        NormalBelief(0.0, 0.0).logpdf(0.0)


def test_bayes_update_matches_batch_posterior(rng):
    prior_mean, prior_var, noise = 0.3, 0.15, 0.05
    obs = rng.normal(0.1, np.sqrt(noise), 12)
    s = BayesState(prior_mean, prior_var, noise)
    for o in obs:
        s = bayes_update(s, o)
    prec = 1 / prior_var + len(obs) / noise
    assert s.post_var == pytest.approx(1 / prec, rel=1e-12)
    assert s.post_mean == pytest.approx((prior_mean / prior_var + obs.sum() / noise) / prec, rel=1e-12)
    assert s.predictive().sigma2 == pytest.approx(s.post_var + noise)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0, 1))
def test_adaptive_update_is_convex_combination(prev, x, g):
    out = adaptive_update(prev, x, g)
    assert out == pytest.approx((1 - g) * prev + g * x, abs=1e-12)
