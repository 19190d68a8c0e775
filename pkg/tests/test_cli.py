"""CLI surface: subcommands, exit codes, config validation, determinism."""

import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from torus_equidist.cli import main
from torus_equidist.experiments import (
    ConfigError,
    PrecisionFailure,
    check_bundle,
    demo_config,
    resolve_config,
    run_experiment,
    validate_config,
    worker_count,
)
from torus_equidist.measures import cantor_lebesgue, diagonal_embedding, to_json_dict


def tiny_config(seed=3):
    return {
        "measure": to_json_dict(diagonal_embedding(cantor_lebesgue())),
        "maps": {"m": 4, "n": 3},
        "orbit": {"lengths": [200, 2000], "starts": 4},
        "equidist": {"tolerance": 0.2},
        "seed": seed,
    }


def write_config(tmp_path, doc, name="config.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_validate_config_reports_json_pointer():
    bad = tiny_config()
    bad["maps"]["m"] = 1
    with pytest.raises(ConfigError) as err:
        validate_config(bad)
    assert err.value.pointer == "/maps/m"
    bad2 = tiny_config()
    bad2["measure"] = {"kind": "no_such_kind"}
    with pytest.raises(ConfigError) as err2:
        validate_config(bad2)
    assert err2.value.pointer == "/measure"


def test_cli_run_and_exit_codes(tmp_path, capsys):
    cfg = write_config(tmp_path, tiny_config())
    code = main(["run", cfg, "--out", str(tmp_path / "out"), "--no-svg"])
    assert code == 0
    out = capsys.readouterr().out
    assert "equidist" in out
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["equidist"]["passed"]
    for f in ("coefficients.csv", "trend.csv", "orbit_000.csv", "orbit_000.csv.json",
              "config.resolved.json"):
        assert (tmp_path / "out" / f).exists()


def test_cli_config_error_exit_2(tmp_path, capsys):
    bad = tiny_config()
    bad["orbit"]["lengths"] = []
    cfg = write_config(tmp_path, bad)
    assert main(["run", cfg]) == 2
    assert "/orbit/lengths" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.json")]) == 2


def test_cli_negative_control_exit_1(tmp_path):
    # x3,x3 orbits of the diagonal Cantor measure stay far from Lebesgue
    doc = tiny_config()
    doc["maps"] = {"m": 3, "n": 3}
    doc["orbit"] = {"lengths": [2000], "starts": 2}
    doc["equidist"] = {"target": "lambda_lambda", "tolerance": 0.2}
    cfg = write_config(tmp_path, doc)
    code = main(["run", cfg, "--out", str(tmp_path / "neg"), "--no-svg"])
    assert code == 1
    report = json.loads((tmp_path / "neg" / "report.json").read_text())
    assert report["equidist"]["max_deviation"] >= 0.3


def test_cli_precision_failure_exit_3(tmp_path, monkeypatch, capsys):
    import torus_equidist.cli as cli_mod

    def boom(*a, **k):
        raise PrecisionFailure("window straddled after retry")

    monkeypatch.setattr(cli_mod, "run_experiment", boom)
    cfg = write_config(tmp_path, tiny_config())
    assert main(["run", cfg]) == 3
    assert "precision failure" in capsys.readouterr().err


def test_cli_check_bundle(tmp_path, capsys):
    cfg = write_config(tmp_path, tiny_config())
    code = main(["check", cfg, "--out", str(tmp_path / "bundle.json")])
    assert code == 0
    bundle = json.loads((tmp_path / "bundle.json").read_text())
    conditions = [c["condition"] for c in bundle["checks"]]
    assert any("4 ~/~ 3" in c for c in conditions)
    assert bundle["all_hypotheses_ok"]


def test_cli_check_flags_dependent_maps(tmp_path):
    from torus_equidist.measures import mixed_base_counterexample

    doc = tiny_config()
    doc["measure"] = to_json_dict(mixed_base_counterexample())
    # both map factors invariant: notes, not failures
    doc["maps"] = {"m": 4, "n": 2}
    bundle = check_bundle(doc)
    xdir = [c for c in bundle["checks"] if "x direction" in c["condition"]][0]
    assert xdir["verdict"] == "equal (invariant direction)"
    assert bundle["all_hypotheses_ok"]
    # 8 shares a power with 4, 4 with 2: both independence hypotheses fail
    doc["maps"] = {"m": 8, "n": 4}
    bundle2 = check_bundle(doc)
    ydir = [c for c in bundle2["checks"] if "y direction" in c["condition"]][0]
    assert ydir["verdict"] == "dependent" and ydir["ok"] is False
    assert not bundle2["all_hypotheses_ok"]


def test_report_determinism_except_timestamp(tmp_path):
    doc = tiny_config(seed=11)
    code1, rep1 = run_experiment(doc, tmp_path / "a", no_svg=True)
    code2, rep2 = run_experiment(doc, tmp_path / "b", no_svg=True)
    j1 = json.loads((tmp_path / "a" / "report.json").read_text())
    j2 = json.loads((tmp_path / "b" / "report.json").read_text())
    j1.pop("generated_at")
    j2.pop("generated_at")
    assert j1 == j2
    assert (tmp_path / "a" / "coefficients.csv").read_text() == \
        (tmp_path / "b" / "coefficients.csv").read_text()


def test_downgrade_keeps_running(tmp_path):
    doc = tiny_config()
    doc["maps"] = {"m": 9, "n": 3}  # 9 ~ 3: hypothesis fails, run continues
    code, report = run_experiment(doc, tmp_path / "dg", no_svg=True)
    assert report["downgraded_to_exploratory"] is True
    assert "equidist" in report


def test_dims_subcommand(tmp_path, capsys):
    doc = tiny_config()
    doc["dimension"] = {"n_samples": 20000, "depth": 30, "angle_search": False}
    cfg = write_config(tmp_path, doc)
    code = main(["dims", cfg, "--out", str(tmp_path / "dims"), "--no-svg"])
    assert code == 0
    report = json.loads((tmp_path / "dims" / "report.json").read_text())
    assert "dim_mu" in report["dimension"]
    assert (tmp_path / "dims" / "dimension_mu.csv").exists()


def test_orbit_subcommand(tmp_path):
    cfg = write_config(tmp_path, tiny_config())
    code = main(["orbit", cfg, "--out", str(tmp_path / "orb")])
    assert code == 0
    assert (tmp_path / "orb" / "orbit_000.csv").exists()


def test_worker_count_env(monkeypatch):
    monkeypatch.delenv("TORUS_EQUIDIST_THREADS", raising=False)
    assert worker_count() == 1
    monkeypatch.setenv("TORUS_EQUIDIST_THREADS", "4")
    assert worker_count() == 4
    monkeypatch.setenv("TORUS_EQUIDIST_THREADS", "junk")
    assert worker_count() == 1


def test_parallel_orbits_match_serial(tmp_path, monkeypatch):
    doc = tiny_config(seed=21)
    monkeypatch.delenv("TORUS_EQUIDIST_THREADS", raising=False)
    _, rep_serial = run_experiment(doc, tmp_path / "ser", no_svg=True)
    monkeypatch.setenv("TORUS_EQUIDIST_THREADS", "3")
    _, rep_par = run_experiment(doc, tmp_path / "par", no_svg=True)
    assert rep_serial["equidist"]["max_deviation"] == rep_par["equidist"]["max_deviation"]
    assert rep_serial["equidist"]["trend"] == rep_par["equidist"]["trend"]


def test_console_entry_point_help():
    proc = subprocess.run(
        [sys.executable, "-m", "torus_equidist.cli", "--help"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    for sub in ("run", "check", "demo", "orbit", "dims"):
        assert sub in proc.stdout


def test_svg_rendering(tmp_path):
    doc = tiny_config(seed=5)
    run_experiment(doc, tmp_path / "svg", no_svg=False)
    svg = (tmp_path / "svg" / "deviation_heatmap.svg").read_text()
    assert svg.lstrip().startswith("<?xml")
    assert (tmp_path / "svg" / "trend.svg").exists()
