"""Plug-in average partial effects and their decomposition."""
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from ..econometrics.double_lasso import double_lasso_ape
from ..econometrics.panel import write_csv

MODES = ("cape", "dape", "tape")
CELLS = ("pooled", "q1", "q2", "q3", "q4", "q5")
CSV_COLUMNS = ["counterfactual", "spec", "cell", "cape", "dape", "tape",
               "cape_se", "dape_se", "tape_se"]


def income_quintiles(x, weights, household_id):
    """Weighted quintile (0..4) of each row's log income.

    Rows are ordered by income with ties broken by household id, and a row
    belongs to the quintile containing the midpoint of its weight.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(weights, dtype=float)
    order = np.lexsort((np.asarray(household_id), x))
    cw = np.cumsum(w[order]) - 0.5 * w[order]
    q = np.empty(len(x), dtype=int)
    q[order] = np.minimum((5.0 * cw / w.sum()).astype(int), 4) if len(x) else 0
    return q


def cell_masks(panel):
    q = income_quintiles(panel.column("x"), panel.weight, panel.household_id)
    out = {"pooled": np.ones(len(panel), bool)}
    for k in range(5):
        out[f"q{k + 1}"] = q == k
    return out


@dataclass(frozen=True, eq=False)
class ApeResult:
    """Contemporaneous, dynamic and total effects by cell.

    ``table`` has one row per cell (pooled, then income quintiles) with
    columns ``cape, dape, tape`` and the matching ``*_se``. The total is
    stored as the sum of the other two, so the decomposition holds exactly.
    """

    table: pd.DataFrame
    counterfactual: str = ""
    spec: str = ""
    seed: int = 0
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_effects(cls, cells, cape, dape, counterfactual="", spec="", seed=0, se=None, extra=None):
        cape = np.asarray(cape, dtype=float)
        dape = np.asarray(dape, dtype=float)
        table = pd.DataFrame({"cell": list(cells), "cape": cape, "dape": dape, "tape": cape + dape})
        se = np.full((len(cells), 3), np.nan) if se is None else np.asarray(se, dtype=float)
        for j, m in enumerate(MODES):
            table[f"{m}_se"] = se[:, j]
        return cls(table, counterfactual, spec, seed, extra or {})

    def cell(self, name):
        row = self.table.loc[self.table["cell"] == name].iloc[0]
        return {m: float(row[m]) for m in MODES}

    @property
    def pooled(self):
        return self.cell("pooled")

    def estimates(self):
        """Array (cells, 3) of cape, dape, tape."""
        return self.table[list(MODES)].to_numpy(float)

    def with_se(self, se):
        table = self.table.copy()
        se = np.asarray(se, dtype=float)
        for j, m in enumerate(MODES):
            table[f"{m}_se"] = se[:, j]
        return replace(self, table=table)

    def to_frame(self):
        df = self.table.copy()
        df.insert(0, "spec", self.spec)
        df.insert(0, "counterfactual", self.counterfactual)
        return df[CSV_COLUMNS]

    def to_csv(self, path):
        write_csv(self.to_frame(), path)

    def plot_data(self):
        """Long format, one row per quintile and mode."""
        rows = []
        for _, r in self.table.iterrows():
            if r["cell"] == "pooled":
                continue
            for m in MODES:
                rows.append((self.counterfactual, self.spec, r["cell"], m, r[m], r[f"{m}_se"]))
        return pd.DataFrame(rows, columns=["counterfactual", "spec", "cell", "mode", "value", "se"])


def _predict(fit, frame):
    builder = fit.builder
    if builder is None:
        raise ValueError("fit carries no design builder")
    try:
        X = builder.design_matrix(frame)
    except KeyError as exc:
        raise ValueError(f"panel lacks a column used by the fit: {exc}") from exc
    if X.shape[1] != len(fit.coef):
        raise ValueError("fitted coefficients do not match the design")
    return X @ fit.coef


def _with(frame, x=None, mu=None, s2=None):
    out = frame.copy()
    if x is not None:
        out["log_family_income"] = x
    if mu is not None:
        out["belief_mean"] = mu
    if s2 is not None:
        out["belief_var"] = s2
    return out


def plug_in_ape(fit, panel, states, transitory=False, dape_at_x0=False, spec="", seed=0):
    """Effects implied by a fitted decision rule at counterfactual states.

    The contemporaneous effect moves income only. The dynamic effect moves
    beliefs only, at counterfactual income (or at baseline income with
    ``dape_at_x0``). The total is their sum. Survey-weighted averages are
    reported pooled and by weighted quintile of baseline log income.

    Parameters
    ----------
    fit : FitResult
        Fit with a design builder over the panel's columns.
    panel : Panel
    states : CounterfactualStates
    transitory : bool
        Beliefs do not respond, so the dynamic effect is zero.
    dape_at_x0 : bool

    Returns
    -------
    ApeResult
    """
    f = panel.frame
    x1, mu1, s1 = (np.asarray(a, float) for a in (states.x1, states.mu1, states.sigma2_1))
    y0 = _predict(fit, f)
    y_c = _predict(fit, _with(f, x=x1))
    d_c = y_c - y0
    if transitory:
        d_d = np.zeros(len(f))
    elif dape_at_x0:
        d_d = _predict(fit, _with(f, mu=mu1, s2=s1)) - y0
    else:
        d_d = _predict(fit, _with(f, x=x1, mu=mu1, s2=s1)) - y_c
    w = panel.weight
    masks = cell_masks(panel)
    cape, dape = [], []
    for c in CELLS:
        m = masks[c]
        if m.any():
            cape.append(np.average(d_c[m], weights=w[m]))
            dape.append(np.average(d_d[m], weights=w[m]))
        else:
            cape.append(np.nan)
            dape.append(np.nan)
    return ApeResult.from_effects(CELLS, cape, dape, states.name, spec, seed)


def double_lasso_effects(panel, spec, states, seed=0, folds=10, transitory=False, spec_name="",
                         cells=CELLS, n_boot=0):
    """Double-Lasso contemporaneous and total effects by cell.

    The contemporaneous effect shifts income only, the total shifts income
    and beliefs; the dynamic effect is their difference.
    """
    cols = states.as_columns()
    income_only = {"log_family_income": cols["log_family_income"]}
    masks = cell_masks(panel)
    cape, dape, se = [], [], []
    info = {}
    for c in cells:
        rc = double_lasso_ape(panel, spec, income_only, seed, folds, n_boot=n_boot, rows=masks[c])
        if transitory:
            rt = rc
        else:
            rt = double_lasso_ape(panel, spec, cols, seed, folds, n_boot=n_boot, rows=masks[c])
        cape.append(rc.ape)
        dape.append(rt.ape - rc.ape)
        dse = float(np.std(rt.boot - rc.boot, ddof=1)) if n_boot > 1 and not transitory else np.nan
        se.append((rc.se, 0.0 if transitory else dse, rt.se))
        info[c] = {"selected": rt.selected, "support_share": rt.support_share}
    return ApeResult.from_effects(cells, cape, dape, states.name, spec_name, seed, se, info)
