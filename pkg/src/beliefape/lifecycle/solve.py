"""Backward induction for the life-cycle model.

Working-age policies live on a (belief state, pension state, cash-on-hand)
grid and are solved by the endogenous-grid method with Gauss-Hermite
quadrature over next-period shocks. Retirement is deterministic given the
pension, and CRRA homogeneity reduces it to a single policy per age on a
grid of cash-on-hand normalized by the pension.

Values are stored in inverse-utility units, ``u^{-1}(V)``, which are close
to linear in cash-on-hand and interpolate well.
"""
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from .. import kernels
from .model import pension_income

C_FLOOR = 1e-10


def utility(c, gamma):
    c = np.asarray(c, dtype=float)
    with np.errstate(divide="ignore"):
        if gamma == 1.0:
            return np.log(c)
        return c ** (1.0 - gamma) / (1.0 - gamma)


def inverse_utility(v, gamma):
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if gamma == 1.0:
            return np.exp(v)
        return np.where(np.isneginf(v) if gamma > 1.0 else np.zeros(v.shape, bool),
                        0.0, ((1.0 - gamma) * v) ** (1.0 / (1.0 - gamma)))


def exponential_grid(top, n, curvature):
    """``n`` nodes on ``[0, top]``, denser near zero."""
    u = np.linspace(0.0, 1.0, n)
    return top * np.expm1(curvature * u) / np.expm1(curvature)


def _gauss_normal(n, sd):
    if sd == 0.0 or n == 1:
        return np.zeros(1), np.ones(1)
    z, w = hermegauss(n)
    return sd * z, w / w.sum()


def quadrature(model):
    """Nodes for next-period (log-income shock, belief-state shock) pairs.

    Under rational expectations the belief state is the permanent component:
    ``x' - kappa' - eta = v + eps`` and ``eta' - eta = v``. Under adaptive
    expectations the agent perceives ``x' - kappa' - m = e`` with variance
    ``var_v + var_eps`` and ``m' - m = gain * e + u``.

    Returns
    -------
    shock_x, shock_b, weights : ndarray
    """
    n = model.grid.n_quad
    if model.adaptive:
        ex = model.expectations
        e, we = _gauss_normal(n, np.sqrt(model.var_v + model.var_eps))
        u, wu = _gauss_normal(n, np.sqrt(ex.var_u))
        sx = np.repeat(e, len(u))
        sb = ex.gain * sx + np.tile(u, len(e))
        w = np.outer(we, wu).ravel()
    else:
        v, wv = _gauss_normal(n, np.sqrt(model.var_v))
        eps, we = _gauss_normal(n, np.sqrt(model.var_eps))
        sx = np.repeat(v, len(eps)) + np.tile(eps, len(v))
        sb = np.repeat(v, len(eps))
        w = np.outer(wv, we).ravel()
    return sx, sb, w


def belief_state_sd(model):
    """Largest cross-sectional SD of the belief state over working ages."""
    if not model.adaptive:
        return float(np.sqrt(model.var_eta1 + (model.T_ret - 1) * model.var_v))
    g = model.expectations.gain
    F = np.array([[1.0 - g, g], [0.0, 1.0]])
    Q = np.array([[g ** 2 * (model.var_v + model.var_eps) + model.expectations.var_u,
                   g * model.var_v],
                  [g * model.var_v, model.var_v]])
    S = model.var_eta1 * np.ones((2, 2))
    best = S[0, 0]
    for _ in range(1, model.T_ret):
        S = F @ S @ F.T + Q
        best = max(best, S[0, 0])
    return float(np.sqrt(best))


@dataclass(frozen=True, eq=False)
class Grids:
    cash: np.ndarray
    belief: np.ndarray
    pension: np.ndarray
    retire: np.ndarray


def build_grids(model):
    g = model.grid
    cash = exponential_grid(g.asset_span * model.mean_net_income, g.n_assets, g.asset_curvature)
    # room for one period of perceived belief shocks beyond the simulated range
    reach = float(np.max(np.abs(quadrature(model)[1])))
    half = max(g.belief_span * belief_state_sd(model) + reach, 0.05)
    belief = np.linspace(-half, half, g.n_beliefs)
    kbar = model.mean_gross
    top = g.pension_span * model.pension.contribution_cap * kbar
    pension = np.linspace(0.02 * kbar, top, g.n_pension) if g.n_pension > 1 else np.array([kbar])
    retire = exponential_grid(g.retire_span, g.n_retire, g.asset_curvature)
    for name, arr in (("cash", cash), ("belief", belief), ("pension", pension), ("retire", retire)):
        if arr.size == 0 or np.any(np.diff(arr) <= 0.0):
            raise ValueError(f"{name} grid must be nonempty and strictly increasing")
    return Grids(cash, belief, pension, retire)


def _interp_extrap(x, xp, fp):
    """Linear interpolation that extrapolates with the edge segments."""
    x = np.asarray(x, dtype=float)
    out = np.interp(x, xp, fp)
    hi = x > xp[-1]
    if np.any(hi):
        s = (fp[-1] - fp[-2]) / (xp[-1] - xp[-2])
        out = np.where(hi, fp[-1] + s * (x - xp[-1]), out)
    lo = x < xp[0]
    if np.any(lo):
        s = (fp[1] - fp[0]) / (xp[1] - xp[0])
        out = np.where(lo, fp[0] + s * (x - xp[0]), out)
    return out


def _egm_rows(a_grid, cash, Eu, Ev, beta, R, gamma):
    """Invert the Euler equation and map endogenous points onto ``cash``.

    ``Eu`` and ``Ev`` hold expected marginal utility and expected value of
    next period for each end-of-period asset node, one row per exogenous
    state. Returns consumption and inverse value on the cash grid.
    """
    rows = Eu.reshape(-1, Eu.shape[-1])
    vrows = Ev.reshape(-1, Ev.shape[-1])
    c_out = np.empty((rows.shape[0], cash.size))
    v_out = np.empty_like(c_out)
    c_endo = (beta * R * rows) ** (-1.0 / gamma)
    m_endo = a_grid[None, :] + c_endo
    v_endo = inverse_utility(utility(c_endo, gamma) + beta * vrows, gamma)
    for r in range(rows.shape[0]):
        me = np.maximum.accumulate(m_endo[r])
        ce = c_endo[r]
        ve = v_endo[r]
        constrained = cash < me[0]
        c = np.interp(cash, me, ce)
        c[constrained] = cash[constrained]
        v = np.interp(cash, me, ve)
        if np.any(constrained):
            mc = cash[constrained]
            v[constrained] = inverse_utility(utility(mc, gamma) + beta * vrows[r, 0], gamma)
        c_out[r] = c
        v_out[r] = v
    shape = Eu.shape[:-1] + (cash.size,)
    return c_out.reshape(shape), v_out.reshape(shape)


def _solve_retirement(model, grids):
    """Normalized retirement policies for ``t = T_ret, ..., T - 1``.

    With pension ``p`` and cash-on-hand ``m``, consumption is
    ``p * c_hat(m / p)``.
    """
    n_ret = model.T - model.T_ret
    grid = grids.retire
    c_hat = np.empty((n_ret, grid.size))
    v_hat = np.empty_like(c_hat)
    c_hat[-1] = grid
    v_hat[-1] = grid
    R, beta, gamma = model.R, model.beta, model.gamma
    for s in range(n_ret - 2, -1, -1):
        m_next = R * grid + 1.0
        c_next = np.maximum(_interp_extrap(m_next, grid, c_hat[s + 1]), C_FLOOR)
        v_next = np.maximum(_interp_extrap(m_next, grid, v_hat[s + 1]), C_FLOOR)
        Eu = c_next ** (-gamma)
        Ev = utility(v_next, gamma)
        c, v = _egm_rows(grid, grid, Eu[None, :], Ev[None, :], beta, R, gamma)
        c_hat[s] = c[0]
        v_hat[s] = v[0]
    return c_hat, v_hat


def _horizon_weight(model, t):
    """Discounted number of remaining periods, used when ``gamma == 1``."""
    s = np.arange(model.T - t)
    return float((model.beta ** s).sum())


@dataclass(frozen=True, eq=False)
class PolicySolution:
    """Solved policies of a :class:`LifecycleModel`.

    Attributes
    ----------
    asset_grid : ndarray
        Cash-on-hand nodes, shared with end-of-period assets.
    belief_grid : ndarray
        Belief-state nodes: the permanent component under rational
        expectations, the mean belief net of the age profile under adaptive
        expectations.
    pension_grid : ndarray
        Running-average gross earnings nodes, used from ``T_cont`` on.
    consume, value : list of ndarray
        Working-age consumption and inverse value, one array per period with
        shape ``(n_beliefs, n_pension_t, n_assets)``; ``n_pension_t`` is 1
        before ``T_cont``.
    retire_grid, retire_consume, retire_value : ndarray
        Normalized retirement policies.
    """

    model: object
    asset_grid: np.ndarray
    belief_grid: np.ndarray
    pension_grid: np.ndarray
    consume: list
    value: list
    retire_grid: np.ndarray
    retire_consume: np.ndarray
    retire_value: np.ndarray

    def pension_nodes(self, t):
        if t >= self.model.T_cont:
            return self.pension_grid
        return np.zeros(1)

    def working_consumption(self, t, cash, belief, avg_gross=None):
        """Consumption at working period ``t`` for arrays of states."""
        cash = np.ascontiguousarray(cash, dtype=float)
        belief = np.ascontiguousarray(np.broadcast_to(belief, cash.shape), dtype=float)
        if avg_gross is None:
            avg_gross = np.zeros(cash.shape)
        avg_gross = np.ascontiguousarray(np.broadcast_to(avg_gross, cash.shape), dtype=float)
        c = kernels.interp3(self.consume[t], self.asset_grid, self.belief_grid,
                            self.pension_nodes(t), cash, belief, avg_gross)
        return np.clip(c, C_FLOOR, np.maximum(cash, C_FLOOR))

    def retired_consumption(self, t, cash, pension):
        s = t - self.model.T_ret
        c = pension * _interp_extrap(cash / pension, self.retire_grid, self.retire_consume[s])
        return np.clip(c, C_FLOOR, np.maximum(cash, C_FLOOR))

    def retired_value(self, t, cash, pension):
        """Inverse value in retirement."""
        s = t - self.model.T_ret
        vh = _interp_extrap(cash / pension, self.retire_grid, self.retire_value[s])
        if self.model.gamma == 1.0:
            return vh * pension ** _horizon_weight(self.model, t)
        return pension * vh


def solve(model):
    """Solve the model by backward induction.

    Parameters
    ----------
    model : LifecycleModel

    Returns
    -------
    PolicySolution
    """
    grids = build_grids(model)
    c_hat, v_hat = _solve_retirement(model, grids)
    sol = PolicySolution(model, grids.cash, grids.belief, grids.pension,
                         [None] * model.T_ret, [None] * model.T_ret,
                         grids.retire, c_hat, v_hat)
    R, beta, gamma = model.R, model.beta, model.gamma
    a = grids.cash
    nj = grids.belief.size

    # last working period: deterministic continuation into retirement
    t = model.T_ret - 1
    A_now = sol.pension_nodes(t)
    p = pension_income(A_now, model)
    p = np.maximum(p, C_FLOOR)
    m_next = R * a[None, :] + p[:, None]
    c_next = np.maximum(sol.retired_consumption(t + 1, m_next, p[:, None]), C_FLOOR)
    v_next = np.maximum(sol.retired_value(t + 1, m_next, p[:, None]), C_FLOOR)
    Eu = np.broadcast_to(c_next ** (-gamma), (nj,) + c_next.shape)
    Ev = np.broadcast_to(utility(v_next, gamma), (nj,) + c_next.shape)
    sol.consume[t], sol.value[t] = _egm_rows(a, a, Eu, Ev, beta, R, gamma)

    sx, sb, w = quadrature(model)
    kappa_net = model.log_kappa_net
    k = 1.0 / (1.0 - model.tax.tau)
    for t in range(model.T_ret - 2, -1, -1):
        track = t + 1 >= model.T_cont
        n_prev = float(max(t - model.T_cont + 1, 0))
        Eu, Ev = kernels.expect_working(
            a, grids.belief, np.ascontiguousarray(sol.pension_nodes(t)), R, gamma,
            sx, sb, w, float(kappa_net[t + 1]), float(model.kappa[t + 1]),
            model.tax.log_lambda_tilde, k, n_prev, int(track),
            sol.consume[t + 1], sol.value[t + 1], a, grids.belief,
            np.ascontiguousarray(sol.pension_nodes(t + 1)), C_FLOOR)
        sol.consume[t], sol.value[t] = _egm_rows(a, a, Eu, Ev, beta, R, gamma)
    return sol
