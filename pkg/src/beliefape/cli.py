"""Command-line entry point.

Every command reads one YAML configuration file, validated against the
JSON schema shipped in ``beliefape/schemas``, and writes its outputs to a
directory. Relative input paths are resolved against the configuration
file's directory. Exit codes: 0 on success, 2 for configuration errors,
3 for data errors.

    beliefape table1 --config run.yaml --out results/
"""
import argparse
import json
import sys
import warnings
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
import pandas as pd
import yaml

from . import elicitation, seeding
from .counterfactuals.ape import double_lasso_effects, plug_in_ape
from .counterfactuals.bootstrap import bootstrap_ape
from .counterfactuals.states import (BASELINE_LAMBDA, BASELINE_TAU, PERMANENT_CUT, REGRESSIVE_TAU,
                                     baseline_schedule, permanent_states, regressivity_states,
                                     transitory_states)
from .counterfactuals.tax import TaxSchedule
from .econometrics.basis import BasisSpec, fit_basis
from .econometrics.design import LinearSpec
from .econometrics.ols import fit_spec
from .econometrics.panel import Panel, write_csv
from .errors import ConfigError, DataError, DegenerateFitError, RankDeficientError
from .lifecycle import (KAPPA_PROFILES, Adaptive, GridSpec, LifecycleModel, Rational, default_kappa,
                        simulate, solve)
from .table1 import run_table1

COMMANDS = ("solve-simulate", "table1", "estimate-beliefs", "regress", "counterfactual", "bias-correct")
EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3

TABLE1_COLUMNS = ["expectations", "estimator", "cape", "dape", "tape", "check"]
BIAS_COLUMNS = ["term", "m_draws", "beta_ols", "beta_bc", "sim_mean", "sim_sd", "lower", "upper"]


# ---------------------------------------------------------------- configuration

def schema(command):
    text = resources.files("beliefape").joinpath("schemas", f"{command}.json").read_text("utf-8")
    return json.loads(text)


def _field(err):
    path = ".".join(str(p) for p in err.absolute_path)
    return path or "<root>"


def load_config(path, command=None):
    """Parse and validate a run configuration.

    Raises
    ------
    ConfigError
        With one ``field: message`` line per schema violation.
    """
    path = Path(path)
    try:
        cfg = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: configuration must be a mapping")
    cmd = cfg.get("command")
    if cmd not in COMMANDS:
        raise ConfigError(f"command: must be one of {', '.join(COMMANDS)}, got {cmd!r}")
    if command is not None and cmd != command:
        raise ConfigError(f"command: config is for {cmd!r} but {command!r} was invoked")
    v = jsonschema.Draft202012Validator(schema(cmd))
    errs = sorted(v.iter_errors(cfg), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errs:
        raise ConfigError("\n".join(f"{_field(e)}: {e.message}" for e in errs))
    cfg["_base"] = path.resolve().parent
    return cfg


def _input(cfg, key="input"):
    p = Path(cfg[key])
    return p if p.is_absolute() else cfg["_base"] / p


def build_model(block=None, expectations=None):
    """:class:`LifecycleModel` from a configuration block."""
    b = dict(block or {})
    exp = expectations or b.pop("expectations", "rational")
    b.pop("expectations", None)
    gain, var_u = b.pop("gain", 0.5), b.pop("var_u", 0.2)
    kw = {"expectations": Adaptive(gain, var_u) if exp == "adaptive" else Rational()}
    grid = b.pop("grid", None)
    if grid:
        kw["grid"] = GridSpec(**grid)
    profile = b.pop("kappa_profile", None)
    kappa = b.pop("kappa", None)
    t_ret = b.get("T_ret", 35)
    if kappa is not None:
        kw["kappa"] = np.asarray(kappa, float)
    elif profile is not None or t_ret != 35:
        kw["kappa"] = default_kappa(t_ret, **KAPPA_PROFILES[profile or "quadratic"])
    if "lambda_tilde" in b or "tau" in b:
        kw["tax"] = TaxSchedule.from_lambda_tilde(b.pop("lambda_tilde", 3.826), b.pop("tau", 0.137))
    kw.update(b)
    try:
        return LifecycleModel(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"model: {exc}") from exc


def linear_spec(block):
    b = {k: v for k, v in block.items() if k != "type"}
    for k in ("terms", "center"):
        if k in b:
            b[k] = tuple(b[k])
    return LinearSpec(**b)


def basis_spec(block):
    b = {k: v for k, v in block.items() if k not in ("type", "name")}
    for k in ("always_include", "controls"):
        if k in b:
            b[k] = tuple(b[k])
    return BasisSpec(**b)


def read_panel(cfg):
    path = _input(cfg)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    return Panel.read_csv(path, cfg.get("controls"))


# ---------------------------------------------------------------- charts

def _fmt(v):
    return f"{v:.2f}".rstrip("0").rstrip(".")


def stacked_bar_svg(plot_data, title="", width=480, height=320):
    """Stacked CAPE (black) and DAPE (grey) bars by income quintile.

    Positive and negative segments stack away from zero separately.
    Returns a self-contained SVG document.
    """
    df = plot_data[plot_data["mode"].isin(["cape", "dape"])]
    cells = list(dict.fromkeys(df["cell"]))
    vals = {(r.cell, r.mode): float(r.value) for r in df.itertuples()}
    tops, bots = [0.0], [0.0]
    for c in cells:
        v = [vals.get((c, m), 0.0) for m in ("cape", "dape")]
        v = [0.0 if not np.isfinite(a) else a for a in v]
        tops.append(sum(a for a in v if a > 0))
        bots.append(sum(a for a in v if a < 0))
    hi, lo = max(tops), min(bots)
    if hi - lo <= 0:
        hi, lo = 1.0, -1.0
    left, right, top, bottom = 60.0, 20.0, 36.0, 40.0
    ph = height - top - bottom
    pw = width - left - right

    def ypos(v):
        return top + (hi - v) / (hi - lo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>']
    if title:
        out.append(f'<text x="{_fmt(width / 2)}" y="18" text-anchor="middle" font-size="13">{title}</text>')
    for tick in np.linspace(lo, hi, 5):
        y = ypos(tick)
        out.append(f'<line x1="{_fmt(left - 4)}" y1="{_fmt(y)}" x2="{_fmt(left)}" y2="{_fmt(y)}" stroke="black"/>')
        out.append(f'<text x="{_fmt(left - 6)}" y="{_fmt(y + 4)}" text-anchor="end">{tick:.3f}</text>')
    out.append(f'<line x1="{_fmt(left)}" y1="{_fmt(top)}" x2="{_fmt(left)}" y2="{_fmt(top + ph)}" stroke="black"/>')
    slot = pw / max(len(cells), 1)
    bw = 0.6 * slot
    for i, c in enumerate(cells):
        x = left + i * slot + 0.5 * (slot - bw)
        up = down = 0.0
        for m, color in (("cape", "black"), ("dape", "#999999")):
            v = vals.get((c, m), 0.0)
            if not np.isfinite(v) or v == 0.0:
                continue
            if v > 0:
                y0, y1 = ypos(up + v), ypos(up)
                up += v
            else:
                y0, y1 = ypos(down), ypos(down + v)
                down += v
            out.append(f'<rect x="{_fmt(x)}" y="{_fmt(y0)}" width="{_fmt(bw)}" height="{_fmt(y1 - y0)}" '
                       f'fill="{color}"><title>{c} {m} {v:.5f}</title></rect>')
        out.append(f'<text x="{_fmt(x + bw / 2)}" y="{_fmt(top + ph + 16)}" text-anchor="middle">{c.upper()}</text>')
    y0 = ypos(0.0)
    out.append(f'<line x1="{_fmt(left)}" y1="{_fmt(y0)}" x2="{_fmt(width - right)}" y2="{_fmt(y0)}" stroke="black"/>')
    lx = width - right - 110
    out.append(f'<rect x="{_fmt(lx)}" y="{_fmt(height - 16)}" width="10" height="10" fill="black"/>')
    out.append(f'<text x="{_fmt(lx + 14)}" y="{_fmt(height - 7)}">CAPE</text>')
    out.append(f'<rect x="{_fmt(lx + 55)}" y="{_fmt(height - 16)}" width="10" height="10" fill="#999999"/>')
    out.append(f'<text x="{_fmt(lx + 69)}" y="{_fmt(height - 7)}">DAPE</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- commands

def cmd_solve_simulate(cfg, out):
    model = build_model(cfg.get("model"))
    n = int(cfg.get("n_households", 10_000))
    sim = simulate(solve(model), model, n, seeding.derive_seed(cfg["seed"], seeding.SIMULATE))
    write_csv(sim.to_frame(positive_assets_only=cfg.get("positive_assets_only", True)), out / "panel.csv")
    write_csv(sim.age_profiles(), out / "age_profiles.csv")
    return ["panel.csv", "age_profiles.csv"]


def cmd_table1(cfg, out):
    regimes = cfg.get("regimes", ["rational", "adaptive"])
    ages = tuple(cfg.get("ages", (26, 49)))
    tables, by_age = [], []
    for reg in regimes:
        model = build_model(cfg.get("model"), reg)
        res = run_table1(model, cfg.get("rate", 0.10), int(cfg.get("n_households", 100_000)),
                         seeding.derive_seed(cfg["seed"], seeding.SIMULATE), ages,
                         tuple(cfg.get("by_ages", (26, 35, 45))), tuple(cfg.get("specs", ("linear", "quadratic", "spline"))))
        t = res.table.copy()
        t.insert(0, "expectations", reg)
        tables.append(t)
        a = res.by_age.copy()
        a.insert(0, "expectations", reg)
        by_age.append(a)
    write_csv(pd.concat(tables, ignore_index=True)[TABLE1_COLUMNS], out / "table1.csv")
    write_csv(pd.concat(by_age, ignore_index=True)[["expectations", "age"] + TABLE1_COLUMNS[1:]],
              out / "table1_by_age.csv")
    return ["table1.csv", "table1_by_age.csv"]


def cmd_estimate_beliefs(cfg, out):
    path = _input(cfg)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    frame, fmt, skipped = elicitation.read_responses(path, cfg.get("format", "auto"), cfg.get("lenient", False))
    for msg in skipped:
        print(f"skipped {msg}", file=sys.stderr)
    if fmt is None:
        res = pd.DataFrame(columns=elicitation.BELIEF_COLUMNS)
    else:
        try:
            res = elicitation.estimate_responses(frame, fmt, cfg.get("m_draws", elicitation.LIKELIHOOD_TRIALS))
        except DegenerateFitError as exc:
            raise DataError(str(exc)) from exc
    write_csv(res, out / "beliefs.csv")
    return ["beliefs.csv"]


def _fit(block, panel):
    if block.get("type", "linear") == "basis":
        return fit_basis(basis_spec(block), panel)
    return fit_spec(linear_spec(block), panel)


def cmd_regress(cfg, out):
    panel = read_panel(cfg)
    fit = _fit(cfg["spec"], panel)
    write_csv(fit.table(), out / "coefficients.csv")
    stats = pd.DataFrame({"n_obs": [fit.n_obs], "n_clusters": [fit.n_clusters], "r_squared": [fit.r_squared]})
    write_csv(stats, out / "fit_stats.csv")
    return ["coefficients.csv", "fit_stats.csv"]


def _states(cfg, panel, name):
    tax0 = baseline_schedule(panel, cfg.get("baseline_lambda", BASELINE_LAMBDA),
                             cfg.get("baseline_tau", BASELINE_TAU))
    if name == "transitory":
        return transitory_states(panel, tax0, cfg.get("permanent_cut", PERMANENT_CUT))
    if name == "permanent":
        return permanent_states(panel, tax0, cfg.get("permanent_cut", PERMANENT_CUT))
    return regressivity_states(panel, tax0, cfg.get("regressive_tau", REGRESSIVE_TAU))


def counterfactual_effects(cfg, panel, name):
    """:class:`ApeResult` of one named counterfactual under the configured estimator."""
    spec_block = cfg["spec"]
    spec_name = spec_block.get("name", spec_block.get("type", "linear"))
    n_boot = int(cfg.get("n_boot", 0))
    seed = int(cfg["seed"])
    transitory = name == "transitory"
    if cfg.get("estimator", "ols") == "double_lasso":
        if spec_block.get("type") != "basis":
            raise ConfigError("spec: the double-Lasso estimator needs a basis specification")
        states = _states(cfg, panel, name)
        return double_lasso_effects(panel, basis_spec(spec_block), states, seed, cfg.get("folds", 10),
                                    transitory, spec_name, n_boot=n_boot)

    def pipeline(p, s=seed):
        fit = _fit(spec_block, p)
        return plug_in_ape(fit, p, _states(cfg, p, name), transitory, cfg.get("dape_at_x0", False),
                           spec_name, s)

    res = pipeline(panel)
    if n_boot > 0:
        se, _ = bootstrap_ape(pipeline, panel, n_boot, seeding.derive_seed(seed, seeding.BOOTSTRAP),
                              cfg.get("threads", 1))
        res = res.with_se(se)
    return res


def cmd_counterfactual(cfg, out):
    panel = read_panel(cfg)
    names = cfg.get("counterfactuals", ["transitory", "permanent", "regressivity"])
    frames, plots, files = [], [], []
    for name in names:
        res = counterfactual_effects(cfg, panel, name)
        frames.append(res.to_frame())
        pdata = res.plot_data()
        plots.append(pdata)
        (out / f"{name}.svg").write_text(stacked_bar_svg(pdata, name), encoding="utf-8")
        files.append(f"{name}.svg")
    write_csv(pd.concat(frames, ignore_index=True), out / "ape.csv")
    write_csv(pd.concat(plots, ignore_index=True), out / "plot_data.csv")
    return ["ape.csv", "plot_data.csv"] + files


def cmd_bias_correct(cfg, out):
    panel = read_panel(cfg)
    spec = linear_spec(cfg["spec"])
    n_sims = int(cfg.get("n_sims", 1000))
    if n_sims == 1:
        warnings.warn("n_sims=1 gives a degenerate simulation band", stacklevel=2)
    terms = cfg.get("terms", ["mu", "x"])
    rows = []
    for m in cfg.get("m_grid", [1, 5, 10, 50, 100]):
        bc = elicitation.bias_correct(panel, spec, int(m), n_sims, seeding.derive_seed(cfg["seed"], seeding.ESTIMATE))
        for t in terms:
            if t not in bc.names:
                raise ConfigError(f"terms: {t!r} is not a regressor of the specification")
            rows.append({"term": t, "m_draws": int(m), **bc.term(t)})
    df = pd.DataFrame(rows, columns=BIAS_COLUMNS[:6])
    df["lower"] = df["beta_bc"] - 2.0 * df["sim_sd"]
    df["upper"] = df["beta_bc"] + 2.0 * df["sim_sd"]
    write_csv(df[BIAS_COLUMNS], out / "bias_correction.csv")
    return ["bias_correction.csv"]


HANDLERS = {
    "solve-simulate": cmd_solve_simulate,
    "table1": cmd_table1,
    "estimate-beliefs": cmd_estimate_beliefs,
    "regress": cmd_regress,
    "counterfactual": cmd_counterfactual,
    "bias-correct": cmd_bias_correct,
}


def run(command, config, out):
    """Run one command; returns the list of files written."""
    cfg = load_config(config, command)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return HANDLERS[command](cfg, out)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="beliefape", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="YAML run configuration")
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)
    try:
        files = run(args.command, args.config, args.out)
    except ConfigError as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, RankDeficientError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    for f in files:
        print(Path(args.out) / f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
