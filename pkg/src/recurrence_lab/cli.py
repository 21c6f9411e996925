"""Command-line entry point.

Subcommands: run (dispatch on the config's experiment kind), validate
(report-only schema check), and thin wrappers per experiment kind that check
the config names the matching kind. `dimension` and `subshift` also accept
direct flags for quick calculations without a config file.

Exit codes: 0 success, 2 config/validation error, 3 runtime error. Reports
are JSON; per-series data goes to CSV side files next to --out.
"""

import argparse
import csv
import json
import os
import sys

from .config import EXPERIMENTS, load_config, validate_config
from .errors import ConfigError, RecurrenceLabError
from .runner import fmt_cell, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _add_common(parser, need_config=True):
    parser.add_argument("--config", required=need_config,
                        help="experiment config JSON")
    parser.add_argument("--out", help="report JSON path (CSV side files share "
                                      "the stem)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--threads", type=int,
                        help="worker threads (default: RECLAB_THREADS or serial); "
                             "results never depend on this")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="recurrence-lab",
        description="Recurrence statistics of piecewise-affine expanding maps")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the experiment named in the config")
    _add_common(run_p)

    val_p = sub.add_parser("validate", help="validate a config without running")
    val_p.add_argument("--config", required=True)

    for kind in ("dichotomy", "mixing", "boxdim", "volume", "sandwich",
                 "scaled-measure"):
        p = sub.add_parser(kind, help=f"run a {kind} experiment config")
        _add_common(p)

    dim_p = sub.add_parser("dimension", help="closed-form dimension calculator")
    _add_common(dim_p, need_config=False)
    dim_p.add_argument("--betas", help="comma-separated expansion factors")
    dim_p.add_argument("--t", help="comma-separated accumulation exponents")

    sh_p = sub.add_parser("subshift", help="full-cylinder subshift construction")
    _add_common(sh_p, need_config=False)
    sh_p.add_argument("--beta", type=float)
    sh_p.add_argument("--epsilon", type=float)
    return parser


def _resolve_threads(args):
    if getattr(args, "threads", None) is not None:
        return args.threads
    env = os.environ.get("RECLAB_THREADS")
    return int(env) if env else None


def _write_outputs(report, csvs, out_path):
    if out_path is None:
        json.dump(report, sys.stdout, indent=2, default=str)
        sys.stdout.write("\n")
        return
    stem = out_path[:-5] if out_path.endswith(".json") else out_path
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, default=str)
        fh.write("\n")
    for suffix, (header, rows) in csvs.items():
        with open(f"{stem}.{suffix}.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([fmt_cell(v) for v in row])


def _inline_config(args):
    """Build a config from direct flags for dimension/subshift."""
    if args.command == "dimension":
        if not (args.betas and args.t):
            return None
        betas = [float(v) for v in args.betas.split(",")]
        t = [float(v) for v in args.t.split(",")]
        return {"experiment": "dimension", "seed": args.seed or 0,
                "betas": betas, "t_points": [t]}
    if args.command == "subshift":
        if args.beta is None or args.epsilon is None:
            return None
        return {"experiment": "subshift", "seed": args.seed or 0,
                "beta": args.beta, "epsilon": args.epsilon}
    return None


def _print_dimension_summary(report):
    for point in report.get("points", []):
        print(f"t = {point['t']}")
        for i, theta in enumerate(point["theta"]):
            print(f"  theta_{i + 1} = {theta:.12g}   K1={point['k1'][i]} "
                  f"K2={point['k2'][i]} K3={point['k3'][i]}")
    print(f"dimension = {report['dimension']:.12g} at t = {report['argsup_t']}")


def main(argv=None):
    args = build_parser().parse_args(argv)

    if args.command == "validate":
        try:
            cfg = load_config(args.config)
            violations = validate_config(cfg)
        except ConfigError as exc:
            violations = exc.violations
        json.dump({"valid": not violations, "violations": violations},
                  sys.stdout, indent=2)
        sys.stdout.write("\n")
        return EXIT_OK

    cfg = _inline_config(args)
    if cfg is None:
        if not getattr(args, "config", None):
            print("error: provide --config (or the direct flags)", file=sys.stderr)
            return EXIT_CONFIG
        try:
            cfg = load_config(args.config)
        except ConfigError as exc:
            print(json.dumps({"error": {"code": "config",
                                        "messages": exc.violations}}),
                  file=sys.stderr)
            return EXIT_CONFIG

    violations = validate_config(cfg)
    if violations:
        print(json.dumps({"error": {"code": "config", "messages": violations}}),
              file=sys.stderr)
        return EXIT_CONFIG
    if args.command in EXPERIMENTS and cfg["experiment"] != args.command:
        print(json.dumps({"error": {"code": "config", "messages": [
            f"config names experiment '{cfg['experiment']}', "
            f"subcommand is '{args.command}'"]}}), file=sys.stderr)
        return EXIT_CONFIG

    seed = args.seed if args.seed is not None else cfg["seed"]
    try:
        report, csvs = run_experiment(cfg, seed, threads=_resolve_threads(args))
    except RecurrenceLabError as exc:
        print(json.dumps({"error": {"code": type(exc).__name__,
                                    "message": str(exc)}}), file=sys.stderr)
        return EXIT_RUNTIME

    if args.out is None and args.command == "dimension":
        _print_dimension_summary(report)
        return EXIT_OK
    if args.out is None and args.command == "subshift":
        print(f"block_length={report['block_length']} "
              f"branch_count={report['branch_count']} delta={report['delta']:.6g}")
        return EXIT_OK
    _write_outputs(report, csvs, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
