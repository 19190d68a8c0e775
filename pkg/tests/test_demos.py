"""Named demo experiments: exit semantics and artifact surface.

The heavier demos (theorem-star/-inv-1/-inv-2 at full size) are exercised
by the acceptance suite; here the remaining names run at their built-in
sizes and the artifact contracts are checked.
"""

import json
import math

import pytest

from torus_equidist.experiments import DEMO_NAMES, demo_config, run_demo
from torus_equidist.experiments import ConfigError


def test_demo_names_complete():
    assert set(DEMO_NAMES) == {"theorem-star", "theorem-inv-1", "theorem-inv-2",
                               "theorem-ss", "counterexample", "scenery-period"}
    with pytest.raises(ConfigError):
        run_demo("no-such-demo", "/tmp/never")


def test_demo_configs_validate():
    from torus_equidist.experiments import resolve_config

    for name in ("theorem-inv-1", "theorem-inv-2", "theorem-ss", "counterexample"):
        cfg = demo_config(name)
        resolved = resolve_config(cfg)
        assert resolved["seed"] == cfg["seed"]


def test_theorem_ss_demo(tmp_path):
    code, report = run_demo("theorem-ss", tmp_path, seed=7, no_svg=True)
    assert code == 0
    eq = report["equidist"]
    assert eq["target"] == "lambda_lambda"
    assert eq["max_deviation"] <= eq["tolerance"]
    byname = {c["condition"]: c for c in report["checks"]}
    assert byname["strong separation (SSC)"]["verdict"] == "certified"
    assert byname["attractor inside the unit square"]["ok"] is True
    assert byname["m=5 ~/~ ratio 1/4"]["verdict"] == "independent"
    spectral = byname["zoom-frequency condition for m=5"]
    assert spectral["verdict"] == "satisfied_up_to" and spectral["precision"] == 512


def test_counterexample_demo(tmp_path):
    code, report = run_demo("counterexample", tmp_path, seed=11, no_svg=True)
    assert code == 0
    crit = report["pass_criteria"]
    assert crit == {"dim_mu_in_range": True, "x_marginal_in_range": True,
                    "no_non_principal_drop": True}
    # the failed independence hypothesis (4 ~ 2 resonant/dependent structure)
    # downgrades rather than aborts
    assert "dimension" in report
    assert (tmp_path / "dimension_mu.csv").exists()


def test_scenery_period_demo(tmp_path):
    code, report = run_demo("scenery-period", tmp_path, seed=13, no_svg=True)
    assert code == 0
    fx = report["fixtures"]
    ifs = fx["ifs_ratio_quarter"]
    assert ifs["gate_observable"] == "disk_mass_half"
    assert ifs["observables"]["disk_mass_half"]["within_one_bin"]
    assert abs(ifs["predicted_frequency"] - 1 / math.log(4)) < 1e-12
    # the product-Cantor fixture reports all observables without a gate
    cantor = fx["cantor_product_base3"]
    assert set(cantor["observables"]) == {"left_half_mass", "disk_mass_half",
                                          "cov_angle", "cov_log_anisotropy"}
    for obs in cantor["observables"]:
        assert (tmp_path / f"cantor_product_base3_periodogram_{obs}.csv").exists()
    report_json = json.loads((tmp_path / "report.json").read_text())
    assert report_json["kind"] == "scenery_period"
