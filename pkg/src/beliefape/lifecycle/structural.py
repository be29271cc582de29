"""Model-implied effects of a proportional income tax."""
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .simulate import simulate
from .solve import solve


@dataclass(frozen=True, eq=False)
class StructuralEffects:
    """Structural contemporaneous, dynamic and total effects on log consumption.

    Attributes
    ----------
    by_age : pandas.DataFrame
        Columns ``age, n, cape, dape, tape``.
    pooled : dict
        Observation-weighted averages over the evaluation sample.
    panel : SimulatedPanel
        Baseline simulation used for the evaluation.
    """

    by_age: pd.DataFrame
    pooled: dict
    panel: object
    baseline: object
    taxed: object


def structural_tape(model, tax_rate_increase=0.10, seed=0, n_households=100_000,
                    ages=(26, 49), baseline=None, taxed=None, panel=None):
    """Structural effects of a proportional tax on after-tax income.

    Each household in the baseline simulation is hit at its evaluation age
    by either a one-period surprise tax (cash-on-hand falls by the tax on
    current income, beliefs and continuation policies are those of the
    baseline) or a permanent tax from that age on (income and beliefs
    shifted, policies solved in the taxed economy). The effects are mean
    log-consumption differences against the baseline on households with
    positive assets. Counterfactual paths share the baseline's random
    numbers, so only the evaluation-period decision is recomputed.

    Parameters
    ----------
    model : LifecycleModel
        Baseline economy.
    tax_rate_increase : float
        Proportional tax on all after-tax income; log income shifts by
        ``log(1 - rate)``.
    seed : int
    n_households : int
    ages : tuple of int
        Inclusive evaluation age range.
    baseline, taxed, panel : optional
        Precomputed baseline solution, taxed-economy solution and baseline
        simulation.

    Returns
    -------
    StructuralEffects
    """
    rate = float(tax_rate_increase)
    if not 0.0 <= rate < 1.0:
        raise ValueError("tax rate must lie in [0, 1)")
    if baseline is None:
        baseline = solve(model)
    if taxed is None:
        taxed = baseline if rate == 0.0 else solve(model.with_net_scale(model.net_scale * (1.0 - rate)))
    if panel is None:
        panel = simulate(baseline, model, n_households, seed)
    R = model.R
    rows = []
    for age in range(ages[0], ages[1] + 1):
        t = age - 25
        if not 0 <= t < model.T_ret:
            continue
        z = panel.assets[:, t]
        keep = z > 0.0
        z = z[keep]
        w = panel.income[keep, t]
        s = panel.state[keep, t]
        A = panel.avg_gross[keep, t] if t >= model.T_cont else None
        c0 = panel.consumption[keep, t]
        m1 = R * z + (1.0 - rate) * w
        c_tr = baseline.working_consumption(t, m1, s, A)
        c_pm = taxed.working_consumption(t, m1, s, A)
        cape = np.log(c_tr) - np.log(c0)
        tape = np.log(c_pm) - np.log(c0)
        n = int(keep.sum())
        rows.append((age, n, cape.mean() if n else np.nan, tape.mean() if n else np.nan))
    by_age = pd.DataFrame(rows, columns=["age", "n", "cape", "tape"])
    by_age["dape"] = by_age["tape"] - by_age["cape"]
    by_age = by_age[["age", "n", "cape", "dape", "tape"]]
    valid = by_age["n"] > 0
    wts = by_age.loc[valid, "n"].to_numpy(float)
    pooled = {}
    for col in ("cape", "tape"):
        pooled[col] = float(np.average(by_age.loc[valid, col], weights=wts)) if wts.sum() else np.nan
    pooled["dape"] = pooled["tape"] - pooled["cape"]
    pooled["n"] = int(wts.sum())
    return StructuralEffects(by_age, pooled, panel, baseline, taxed)
