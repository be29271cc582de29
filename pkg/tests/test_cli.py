import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import jsonschema
import numpy as np
import pandas as pd
import pytest
import yaml

from beliefape import cli
from beliefape.counterfactuals import CSV_COLUMNS
from beliefape.elicitation import BELIEF_COLUMNS, GROWTH_COLUMNS
from beliefape.synthetic import response_panel, synthetic_panel

GRID = {"n_assets": 30, "n_beliefs": 9, "n_pension": 4, "n_quad": 3, "n_retire": 60}
LINEAR = {"type": "linear", "terms": ["x", "mu", "x:mu", "sigma2", "z", "hh_size"],
          "first_difference": True, "name": "fd"}


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    data = synthetic_panel(200, 3, seed=4)
    data.panel.to_csv(d / "panel.csv")
    response_panel(data).to_csv(d / "responses.csv")
    return d


def _run(d, name, cfg, capsys=None):
    path = d / f"{name}.yaml"
    path.write_text(yaml.safe_dump(cfg), encoding="utf-8")
    out = d / f"out_{name}"
    code = cli.main([cfg.get("command", "regress"), "--config", str(path), "--out", str(out)])
    return code, out


def test_schemas_are_valid_and_closed():
    for cmd in cli.COMMANDS:
        s = cli.schema(cmd)
        jsonschema.Draft202012Validator.check_schema(s)
        assert s["additionalProperties"] is False
        assert {"command", "seed"} <= set(s["required"])


def test_solve_simulate_deterministic(workdir):
    cfg = {"command": "solve-simulate", "seed": 3, "n_households": 200, "model": {"grid": GRID}}
    c1, o1 = _run(workdir, "ss1", cfg)
    c2, o2 = _run(workdir, "ss2", cfg)
    assert c1 == c2 == 0
    for f in ("panel.csv", "age_profiles.csv"):
        assert (o1 / f).read_bytes() == (o2 / f).read_bytes()
    head = (o1 / "panel.csv").read_text().splitlines()[0]
    assert head == "household_id,wave,log_consumption,log_family_income,belief_mean,belief_var,log_assets,age,weight"
    prof = pd.read_csv(o1 / "age_profiles.csv")
    assert len(prof) == 70


def test_table1_null_tax_is_zero(workdir):
    cfg = {"command": "table1", "seed": 1, "n_households": 300, "rate": 0.0,
           "model": {"grid": GRID}, "specs": ["linear"]}
    code, out = _run(workdir, "t1", cfg)
    assert code == 0
    t = pd.read_csv(out / "table1.csv")
    assert list(t.columns) == cli.TABLE1_COLUMNS
    assert set(t["expectations"]) == {"rational", "adaptive"}
    assert np.all(t[["cape", "dape", "tape", "check"]].to_numpy() == 0.0)


def test_table1_check_column_is_zero(workdir):
    cfg = {"command": "table1", "seed": 1, "n_households": 300, "regimes": ["rational"],
           "model": {"grid": GRID}, "specs": ["linear"]}
    code, out = _run(workdir, "t1b", cfg)
    t = pd.read_csv(out / "table1.csv")
    assert code == 0 and np.all(t["check"] == 0.0)
    assert np.all(t["tape"] < 0)
    assert np.all(pd.read_csv(out / "table1_by_age.csv")["check"] == 0.0)


def test_estimate_beliefs_outputs(workdir, capsys):
    g = workdir / "growth.csv"
    pts = np.zeros(12, int)
    pts[3], pts[4] = 60, 40
    bad = pts.copy()
    bad[4] = 30
    rows = [[1, 0, *pts, 10.0], [2, 0, *bad, 10.0]]
    pd.DataFrame(rows, columns=["household_id", "wave", *GROWTH_COLUMNS, "log_family_income"]).to_csv(g, index=False)
    code, _ = _run(workdir, "eb_strict", {"command": "estimate-beliefs", "seed": 0, "input": "growth.csv"})
    assert code == 3 and "line 3" in capsys.readouterr().err
    code, out = _run(workdir, "eb", {"command": "estimate-beliefs", "seed": 0, "input": "growth.csv",
                                     "lenient": True})
    assert code == 0 and "line 3" in capsys.readouterr().err
    b = pd.read_csv(out / "beliefs.csv")
    assert list(b.columns) == BELIEF_COLUMNS and len(b) == 1
    assert b.loc[0, "n_restrictions"] == 3

    m = workdir / "minmax.csv"
    m.write_text("household_id,wave,min_earn,max_earn,prob_below_mid\n1,0,20000,20000,0.5\n")
    code, out = _run(workdir, "eb_mm", {"command": "estimate-beliefs", "seed": 0, "input": "minmax.csv"})
    b = pd.read_csv(out / "beliefs.csv")
    assert code == 0 and b.loc[0, "belief_var"] == 0.0
    assert b.loc[0, "belief_mean"] == pytest.approx(np.log(20000))

    (workdir / "empty.csv").write_text("")
    code, out = _run(workdir, "eb_empty", {"command": "estimate-beliefs", "seed": 0, "input": "empty.csv"})
    b = pd.read_csv(out / "beliefs.csv")
    assert code == 0 and len(b) == 0 and list(b.columns) == BELIEF_COLUMNS


def test_regress(workdir):
    cfg = {"command": "regress", "seed": 0, "input": "panel.csv", "spec": LINEAR}
    code, out = _run(workdir, "rg", cfg)
    c = pd.read_csv(out / "coefficients.csv")
    assert code == 0 and list(c["term"]) == LINEAR["terms"]
    assert list(c.columns) == ["term", "coef", "se", "t", "p_value"]
    s = pd.read_csv(out / "fit_stats.csv")
    assert s.loc[0, "n_clusters"] == 200 and s.loc[0, "n_obs"] == 400


def test_counterfactual_outputs(workdir):
    cfg = {"command": "counterfactual", "seed": 0, "input": "panel.csv", "spec": LINEAR,
           "n_boot": 5, "threads": 2}
    code, out = _run(workdir, "cf", cfg)
    assert code == 0
    ape = pd.read_csv(out / "ape.csv")
    assert list(ape.columns) == CSV_COLUMNS
    # the file carries 12 significant digits
    assert np.allclose(ape["tape"], ape["cape"] + ape["dape"], rtol=0, atol=1e-12)
    tr = ape[ape["counterfactual"] == "transitory"].reset_index(drop=True)
    pm = ape[ape["counterfactual"] == "permanent"].reset_index(drop=True)
    assert np.array_equal(tr["cape"], pm["cape"])
    assert np.all(tr["dape"] == 0.0)
    assert np.allclose(pm["tape"] - tr["tape"], pm["dape"], rtol=0, atol=1e-12)
    assert np.all(np.isfinite(ape["tape_se"]))
    pdata = pd.read_csv(out / "plot_data.csv")
    assert set(pdata["mode"]) == {"cape", "dape", "tape"} and "pooled" not in set(pdata["cell"])
    root = ET.parse(out / "permanent.svg").getroot()
    fills = [r.get("fill") for r in root.iter("{http://www.w3.org/2000/svg}rect")]
    assert "black" in fills and "#999999" in fills


def test_counterfactual_regressivity_null_and_double_lasso(workdir):
    cfg = {"command": "counterfactual", "seed": 0, "input": "panel.csv", "spec": LINEAR,
           "counterfactuals": ["regressivity"], "regressive_tau": 0.196}
    code, out = _run(workdir, "reg0", cfg)
    ape = pd.read_csv(out / "ape.csv")
    assert code == 0 and np.allclose(ape[["cape", "dape", "tape"]], 0.0, atol=1e-12)
    cfg = {"command": "counterfactual", "seed": 0, "input": "panel.csv", "estimator": "double_lasso",
           "spec": {"type": "basis", "degree": 2, "name": "poly2"}, "counterfactuals": ["permanent"],
           "folds": 5}
    code, out = _run(workdir, "dl", cfg)
    ape = pd.read_csv(out / "ape.csv")
    assert code == 0 and list(ape["spec"].unique()) == ["poly2"]
    assert np.allclose(ape["tape"], ape["cape"] + ape["dape"], rtol=0, atol=1e-12)


def test_bias_correct(workdir):
    cfg = {"command": "bias-correct", "seed": 0, "input": "panel.csv", "n_sims": 4,
           "m_grid": [1, 100], "terms": ["mu"],
           "spec": {"type": "linear", "terms": ["x", "mu", "z", "hh_size"], "first_difference": True}}
    c1, o1 = _run(workdir, "bc1", cfg)
    c2, o2 = _run(workdir, "bc2", cfg)
    assert c1 == c2 == 0
    assert (o1 / "bias_correction.csv").read_bytes() == (o2 / "bias_correction.csv").read_bytes()
    t = pd.read_csv(o1 / "bias_correction.csv")
    assert list(t.columns) == cli.BIAS_COLUMNS and len(t) == 2
    assert np.allclose(t["upper"] - t["lower"], 4 * t["sim_sd"])
    cfg["n_sims"] = 1
    with pytest.warns(UserWarning, match="degenerate"):
        code, out = _run(workdir, "bc3", cfg)
    t = pd.read_csv(out / "bias_correction.csv")
    assert code == 0 and np.all(t["sim_sd"] == 0.0)


def test_config_errors(workdir, capsys):
    code, _ = _run(workdir, "bad1", {"command": "regress", "seed": 0, "input": "panel.csv",
                                     "spec": LINEAR, "colour": "red"})
    assert code == 2 and "colour" in capsys.readouterr().err
    code, _ = _run(workdir, "bad2", {"command": "regress", "seed": -1, "input": "panel.csv", "spec": LINEAR})
    assert code == 2 and "seed:" in capsys.readouterr().err
    code, _ = _run(workdir, "bad3", {"command": "counterfactual", "seed": 0, "input": "panel.csv",
                                     "estimator": "double_lasso", "spec": LINEAR})
    assert code == 2 and "basis" in capsys.readouterr().err
    p = workdir / "wrong.yaml"
    p.write_text("command: regress\nseed: 0\n")
    assert cli.main(["table1", "--config", str(p), "--out", str(workdir / "x")]) == 2
    p.write_text("[unclosed")
    assert cli.main(["regress", "--config", str(p), "--out", str(workdir / "x")]) == 2


def test_data_errors(workdir, capsys):
    code, _ = _run(workdir, "miss", {"command": "regress", "seed": 0, "input": "nope.csv", "spec": LINEAR})
    assert code == 3 and "nope.csv" in capsys.readouterr().err
    f = pd.read_csv(workdir / "panel.csv")
    f["belief_mean"] = f["log_family_income"]
    f.to_csv(workdir / "collinear.csv", index=False)
    code, _ = _run(workdir, "rank", {"command": "regress", "seed": 0, "input": "collinear.csv",
                                     "spec": {"type": "linear", "terms": ["x", "mu"], "first_difference": True}})
    assert code == 3 and "mu" in capsys.readouterr().err
    (workdir / "broken.csv").write_text("a,b\n1,2\n")
    code, _ = _run(workdir, "hdr", {"command": "regress", "seed": 0, "input": "broken.csv", "spec": LINEAR})
    assert code == 3


def test_console_entry_point(workdir):
    cfg = workdir / "rg_sub.yaml"
    cfg.write_text(yaml.safe_dump({"command": "regress", "seed": 0, "input": "panel.csv", "spec": LINEAR}))
    r = subprocess.run([sys.executable, "-m", "beliefape.cli", "regress", "--config", str(cfg),
                        "--out", str(workdir / "sub")], capture_output=True, text=True)
    assert r.returncode == 0 and "coefficients.csv" in r.stdout
    r = subprocess.run([sys.executable, "-m", "beliefape.cli", "nonsense", "--config", str(cfg),
                        "--out", str(workdir / "sub")], capture_output=True, text=True)
    assert r.returncode == 2


def test_stacked_bar_svg_handles_mixed_signs():
    pdata = pd.DataFrame({"counterfactual": "c", "spec": "s", "cell": ["q1", "q1", "q2", "q2"],
                          "mode": ["cape", "dape"] * 2, "value": [0.01, -0.03, -0.02, np.nan],
                          "se": np.nan})
    root = ET.fromstring(cli.stacked_bar_svg(pdata, "t"))
    titles = [t.text for t in root.iter("{http://www.w3.org/2000/svg}title")]
    assert len(titles) == 3
