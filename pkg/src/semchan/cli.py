"""Command-line runner.

    semchan run <config.json> [--out-dir DIR] [--format csv|json]
                              [--max-iters N] [--tol X]
    semchan repro (--all | --id ID) [--out-dir DIR] [--format csv|json]
    semchan confirm --sens S --spec S [--prevalence P]
    semchan confirm --np N --nc N
    semchan list

Exit codes: 0 success/pass, 1 reproduction mismatch, 2 config error,
3 algorithm non-convergence. Reports go to stdout (and include wall time);
data files written to --out-dir contain no timestamps, so repeated runs are
byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .errors import ConfigError, NoConvergence, ScenarioError, SemchanError
from .scenarios import (
    REPRODUCTIONS,
    list_reproductions,
    run_config,
    validate_config,
    write_json,
    write_trace_csv,
)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3


def _emit(report: dict) -> None:
    json.dump(report, sys.stdout, indent=2, default=str)
    sys.stdout.write("\n")


def _execute(scenario_id: str, config: dict, out_dir: str, fmt: str, check=None) -> dict:
    started = time.perf_counter()
    results, rows = run_config(config)
    elapsed = time.perf_counter() - started
    trace_path = None
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        if fmt == "csv" and rows is not None:
            trace_path = os.path.join(out_dir, f"{scenario_id}.trace.csv")
            write_trace_csv(trace_path, rows)
        results_path = os.path.join(out_dir, f"{scenario_id}.results.json")
        write_json(results_path, {"results": results, "trace": rows} if fmt == "json" else results)
        trace_path = trace_path or results_path
    report = {
        "scenario": scenario_id,
        "results": results,
        "trace_file": trace_path,
        "wall_time_s": round(elapsed, 6),
    }
    if check is not None:
        failures = check(results)
        report["passed"] = not failures
        report["failures"] = failures
    return report


def _cmd_run(args) -> int:
    try:
        with open(args.config) as f:
            config = json.load(f)
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(f"config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.max_iters is not None:
        config["max_iters"] = args.max_iters
    if args.tol is not None:
        config["stop_divergence"] = args.tol
    scenario_id = config.get("id") or os.path.splitext(os.path.basename(args.config))[0]
    report = _execute(scenario_id, config, args.out_dir, args.format)
    _emit(report)
    return EXIT_OK


def _cmd_repro(args) -> int:
    ids = list(REPRODUCTIONS) if args.all else [args.id]
    for rid in ids:
        if rid not in REPRODUCTIONS:
            print(f"unknown reproduction id {rid!r}; see `semchan list`", file=sys.stderr)
            return EXIT_CONFIG
    reports = []
    for rid in ids:
        entry = REPRODUCTIONS[rid]
        reports.append(
            _execute(rid, dict(entry["config"]), args.out_dir, args.format, entry["check"])
        )
    _emit({"reports": reports, "all_passed": all(r["passed"] for r in reports)})
    return EXIT_OK if all(r["passed"] for r in reports) else EXIT_MISMATCH


def _cmd_confirm(args) -> int:
    config: dict = {"kind": "confirm"}
    if args.sens is not None or args.spec is not None:
        if args.sens is None or args.spec is None:
            print("--sens and --spec must be given together", file=sys.stderr)
            return EXIT_CONFIG
        config["sensitivity"] = args.sens
        config["specificity"] = args.spec
        if args.prevalence is not None:
            config["prevalence"] = args.prevalence
    if args.np is not None or args.nc is not None:
        if args.np is None or args.nc is None:
            print("--np and --nc must be given together", file=sys.stderr)
            return EXIT_CONFIG
        config["positive_count"] = args.np
        config["counter_count"] = args.nc
    report = _execute("confirm", config, None, "json")
    _emit(report)
    return EXIT_OK


def _cmd_list(_args) -> int:
    _emit({"reproductions": list_reproductions()})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semchan",
        description="Semantic-channel scenario runner and reproduction harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=None, help="directory for trace/data files")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p_run = sub.add_parser("run", parents=[common], help="run one scenario config")
    p_run.add_argument("config", help="path to a scenario JSON file")
    p_run.add_argument("--max-iters", type=int, default=None)
    p_run.add_argument("--tol", type=float, default=None,
                       help="override the divergence stop threshold where applicable")
    p_run.set_defaults(func=_cmd_run)

    p_repro = sub.add_parser("repro", parents=[common],
                             help="run built-in reproductions and score them")
    group = p_repro.add_mutually_exclusive_group(required=True)
    group.add_argument("--all", action="store_true")
    group.add_argument("--id", default=None)
    p_repro.set_defaults(func=_cmd_repro)

    p_conf = sub.add_parser("confirm", help="confirmation measures for a test")
    p_conf.add_argument("--sens", type=float, default=None)
    p_conf.add_argument("--spec", type=float, default=None)
    p_conf.add_argument("--prevalence", type=float, default=None)
    p_conf.add_argument("--np", type=int, default=None, help="positive example count")
    p_conf.add_argument("--nc", type=int, default=None, help="counterexample count")
    p_conf.set_defaults(func=_cmd_confirm)

    p_list = sub.add_parser("list", help="list built-in reproduction scenarios")
    p_list.set_defaults(func=_cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoConvergence as exc:
        print(f"did not converge: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except ScenarioError as exc:
        if isinstance(exc.__cause__, NoConvergence):
            print(f"did not converge: {exc}", file=sys.stderr)
            return EXIT_NO_CONVERGENCE
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except SemchanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
