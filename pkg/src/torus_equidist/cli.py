"""Command-line interface.

Subcommands: run, check, demo, orbit, dims. Exit codes: 0 pass,
1 fail-versus-tolerance, 2 config error, 3 precision failure. The worker
count for orbit batches comes from TORUS_EQUIDIST_THREADS (default 1).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiments import (
    DEMO_NAMES,
    ConfigError,
    PrecisionFailure,
    check_bundle,
    resolve_config,
    run_demo,
    run_experiment,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_PRECISION = 3


def _load_config(path: str) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc


def _apply_overrides(doc: dict, args) -> dict:
    if args.seed is not None:
        doc["seed"] = args.seed
    if getattr(args, "precision_bits", None) is not None:
        doc.setdefault("orbit", {})["precision_bits"] = args.precision_bits
    return doc


def _out_dir(doc: dict, args, default: str) -> Path:
    if args.out:
        return Path(args.out)
    return Path(doc.get("out_dir", default))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="torus-equidist",
        description="Orbits of fractal measures under toral x m, x n maps: "
                    "equidistribution, dimension, and zoom-spectrum experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, precision=True):
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--no-svg", action="store_true", help="skip figure rendering")
        if precision:
            p.add_argument("--precision-bits", type=int,
                           help="override orbit output precision (<= 50)")

    p_run = sub.add_parser("run", help="run a full experiment from a JSON config")
    p_run.add_argument("config")
    add_common(p_run)

    p_check = sub.add_parser("check", help="hypothesis checker bundle for a config")
    p_check.add_argument("config")
    p_check.add_argument("--out", help="write the verdict bundle here as JSON")
    p_check.add_argument("--seed", type=int, help=argparse.SUPPRESS)

    p_demo = sub.add_parser("demo", help="run a named demo experiment")
    p_demo.add_argument("name", choices=DEMO_NAMES)
    add_common(p_demo, precision=False)

    p_orbit = sub.add_parser("orbit", help="emit orbit CSVs only (no statistics)")
    p_orbit.add_argument("config")
    add_common(p_orbit)

    p_dims = sub.add_parser("dims", help="dimension analysis only")
    p_dims.add_argument("config")
    add_common(p_dims, precision=False)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PrecisionFailure as exc:
        print(f"precision failure: {exc}", file=sys.stderr)
        return EXIT_PRECISION


def _dispatch(args) -> int:
    if args.command == "run":
        doc = _apply_overrides(_load_config(args.config), args)
        out = _out_dir(doc, args, "out")
        code, report = run_experiment(doc, out, no_svg=args.no_svg)
        _print_summary(report)
        print(f"artifacts in {out}")
        return code

    if args.command == "check":
        doc = _load_config(args.config)
        if args.seed is not None:
            doc["seed"] = args.seed
        bundle = check_bundle(doc)
        text = json.dumps(bundle, indent=2, sort_keys=True)
        print(text)
        if args.out:
            Path(args.out).parent.mkdir(parents=True, exist_ok=True)
            Path(args.out).write_text(text + "\n")
        return EXIT_PASS if bundle["all_hypotheses_ok"] else EXIT_FAIL

    if args.command == "demo":
        out = Path(args.out) if args.out else Path(f"out-demo-{args.name}")
        seed = args.seed if args.seed is not None else 2024
        code, report = run_demo(args.name, out, seed=seed, no_svg=args.no_svg)
        _print_summary(report)
        print(f"demo {args.name}: {'PASS' if code == 0 else 'FAIL'}; artifacts in {out}")
        return code

    if args.command == "orbit":
        doc = _apply_overrides(_load_config(args.config), args)
        doc.setdefault("analyses", {})
        doc["analyses"] = {"checks": False, "equidist": True,
                           "dimension": False, "scenery": False}
        out = _out_dir(doc, args, "out-orbit")
        # orbits are dumped by the equidist stage; tolerance result is ignored
        code, report = run_experiment(doc, out, no_svg=True)
        print(f"orbit CSVs in {out}")
        return EXIT_PASS

    if args.command == "dims":
        doc = _load_config(args.config)
        if args.seed is not None:
            doc["seed"] = args.seed
        doc["analyses"] = {"checks": True, "equidist": False,
                           "dimension": True, "scenery": False}
        doc.setdefault("dimension", {})
        out = _out_dir(doc, args, "out-dims")
        code, report = run_experiment(doc, out, no_svg=args.no_svg)
        _print_summary(report)
        print(f"dimension artifacts in {out}")
        return EXIT_PASS

    raise AssertionError(f"unhandled command {args.command}")


def _print_summary(report: dict) -> None:
    for c in report.get("checks", []):
        mark = {True: "ok ", False: "FAIL", None: "note"}[c.get("ok")]
        print(f"  [{mark}] {c['condition']}: {c['verdict']}")
    if report.get("downgraded_to_exploratory"):
        print("  -> a hypothesis failed: experiment downgraded to exploratory")
    eq = report.get("equidist")
    if eq:
        print(f"  equidist: max deviation {eq['max_deviation']:.5f} "
              f"(tolerance {eq['tolerance']:.3g}) -> {'pass' if eq['passed'] else 'fail'}")
        for n, d in eq["trend"]:
            print(f"    N={n:>9d}  max deviation {d:.5f}")
    if "max_deviation" in report and "map" in report:  # circle baseline
        print(f"  circle: max deviation {report['max_deviation']:.5f} "
              f"(tolerance {report['tolerance']:.3g}) -> "
              f"{'pass' if report['passed'] else 'fail'}")
    dims = report.get("dimension")
    if dims:
        for key in ("dim", "dim_mu", "dim_p1", "dim_p2"):
            if key in dims:
                d = dims[key]
                print(f"  {key}: {d['fitted_dim']:.4f} ± {d['confidence']:.3f}")
        if "projection_drop_search" in dims:
            s = dims["projection_drop_search"]
            print(f"  projection drop search: {len(s['flagged_angles'])} flagged angles")
    sc = report.get("scenery")
    if sc:
        for name, o in sc.get("observables", {}).items():
            if o["peaks"]:
                f, p = o["peaks"][0]
                print(f"  scenery[{name}]: peak at {f:.4f} "
                      f"(predicted {sc['predicted_frequency']:.4f}, bin {o['bin_width']:.4f})")
    for name, fx in report.get("fixtures", {}).items():
        print(f"  {name}: peak {fx['peak_frequency']:.4f} vs predicted "
              f"{fx['predicted_frequency']:.4f} ({'ok' if fx['within_one_bin'] else 'MISS'})")


if __name__ == "__main__":
    sys.exit(main())
