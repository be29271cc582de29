"""Structural and regression-based effects of a proportional tax in the model economy.

Regressions use the simulated households with positive assets at ages
26 to 49. Log consumption is regressed on log income, the belief mean, their
interaction, age, age squared and a function of log assets; the fitted rule
is then evaluated with income and belief means both lowered by
``log(1 - rate)``.
"""
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .counterfactuals.ape import plug_in_ape
from .counterfactuals.states import CounterfactualStates
from .econometrics.design import LinearSpec
from .econometrics.ols import fit_spec
from .econometrics.panel import Panel
from .lifecycle import KAPPA_PROFILES, default_kappa, structural_tape

BASE_TERMS = ("x", "mu", "x:mu", "age", "age:age")
ASSET_TERMS = {
    "linear": ("z",),
    "quadratic": ("z", "z:z"),
    "spline": ("z", "spline(z)"),
}
SPECS = tuple(ASSET_TERMS)


def regression_spec(name, knots=20):
    return LinearSpec(BASE_TERMS + ASSET_TERMS[name], intercept=True,
                      center=("x", "mu", "age"), knots=knots, name=name)


def evaluation_panel(sim, ages=(26, 49)):
    frame = sim.to_frame(positive_assets_only=True, working_only=True)
    frame = frame[(frame["age"] >= ages[0]) & (frame["age"] <= ages[1])]
    return Panel(frame.reset_index(drop=True), controls=[])


def proportional_tax_states(panel, rate):
    d = float(np.log1p(-rate))
    return CounterfactualStates(panel.column("x") + d, panel.column("mu") + d,
                                panel.column("sigma2"), "permanent")


@dataclass(frozen=True, eq=False)
class Table1Result:
    """Pooled and by-age structural and regression effects.

    ``table`` has columns ``estimator, cape, dape, tape, check`` with
    ``check = cape + dape - tape``; ``by_age`` adds an ``age`` column.
    """

    table: pd.DataFrame
    by_age: pd.DataFrame
    structural: object


def semi_structural(panel, rate, specs=SPECS, by_ages=(26, 35, 45)):
    states = proportional_tax_states(panel, rate)
    rows, age_rows = [], []
    for name in specs:
        fit = fit_spec(regression_spec(name), panel)
        res = plug_in_ape(fit, panel, states, spec=name)
        p = res.pooled
        rows.append((name, p["cape"], p["dape"], p["tape"]))
        for a in by_ages:
            m = panel.column("age") == a
            if m.any():
                sub = panel.subset(m)
                st = CounterfactualStates(states.x1[m], states.mu1[m], states.sigma2_1[m])
                q = plug_in_ape(fit, sub, st, spec=name).pooled
                age_rows.append((a, name, q["cape"], q["dape"], q["tape"]))
    return rows, age_rows


def run_table1(model, rate=0.10, n_households=100_000, seed=0, ages=(26, 49), by_ages=(26, 35, 45),
               specs=SPECS):
    """Structural effects and the three regression specifications for one economy.

    Returns
    -------
    Table1Result
    """
    st = structural_tape(model, rate, seed, n_households, ages)
    p = st.pooled
    rows = [("structural", p["cape"], p["dape"], p["tape"])]
    age_rows = []
    for a in by_ages:
        r = st.by_age.loc[st.by_age["age"] == a]
        if len(r):
            r = r.iloc[0]
            age_rows.append((a, "structural", r["cape"], r["dape"], r["tape"]))
    panel = evaluation_panel(st.panel, ages)
    if len(panel):
        srows, sage = semi_structural(panel, rate, specs, by_ages)
    else:
        srows = [(s, 0.0, 0.0, 0.0) for s in specs]
        sage = []
    table = pd.DataFrame(rows + srows, columns=["estimator", "cape", "dape", "tape"])
    by_age = pd.DataFrame(age_rows + sage, columns=["age", "estimator", "cape", "dape", "tape"])
    by_age = by_age.sort_values(["age"], kind="mergesort").reset_index(drop=True)
    for df in (table, by_age):
        df["check"] = df["cape"] + df["dape"] - df["tape"]
    return Table1Result(table, by_age, st)


def kappa_sensitivity(model, rate=0.10, n_households=20_000, seed=0, profiles=None):
    """Pooled structural effects under alternative age profiles of income."""
    profiles = KAPPA_PROFILES if profiles is None else profiles
    rows = []
    for name, kappa in profiles.items():
        k = default_kappa(model.T_ret, **kappa) if isinstance(kappa, dict) else np.asarray(kappa, float)
        p = structural_tape(model.replace(kappa=k), rate, seed, n_households).pooled
        rows.append((name, p["cape"], p["dape"], p["tape"]))
    return pd.DataFrame(rows, columns=["profile", "cape", "dape", "tape"])
