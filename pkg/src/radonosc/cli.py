"""Command line entry point: ``radonosc <experiment> [options]``."""
from __future__ import annotations

import argparse
import sys

from .experiments import (EXPERIMENTS, PRESETS, ConfigError, ExperimentConfig, emit_tables, parse_config,
                          run_experiment)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3

_HELP = {
    "verify-kernel": "size, cancellation and Holder checks of a kernel",
    "probe-oscillation": "worst oscillation ratio of H_t f across input sizes",
    "gauss-table": "max |G(a/q)| per denominator and the fitted decay exponent",
    "multiplier-scan": "vanishing of m_t at integers and the continuous multiplier",
    "martingale-probe": "martingale oscillation ratio and its drift under refinement",
    "split-check": "long/short split bound on random families",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radonosc", description="Numerical probes of truncated Radon transforms.")
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--config", help="key = value file with dotted keys")
        p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config key (repeatable)")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="directory for <experiment>.<format>; stdout if omitted")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--budget-cells", type=int)
        p.add_argument("--threads", type=int, default=1)
    return parser


def _load(args) -> ExperimentConfig:
    values = {}
    if args.preset:
        values.update(PRESETS[args.preset])
    if args.config:
        try:
            with open(args.config) as fh:
                values.update(parse_config(fh.read()))
        except OSError as exc:
            raise ConfigError("--config", str(exc)) from None
    if args.set:
        values.update(parse_config("\n".join(args.set)))
    if args.budget_cells is not None:
        values["budget.cells"] = args.budget_cells
    if args.seed is not None:
        if args.seed < 0 or args.seed >= 2 ** 64:
            raise ConfigError("--seed", "must be an unsigned 64-bit integer")
        values["seed"] = args.seed
    return ExperimentConfig(args.experiment, values, args.threads)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"radonosc: config error at {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = run_experiment(cfg)
    except ConfigError as exc:
        print(f"radonosc: config error at {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        text = emit_tables(report, args.format, args.out)
    except OSError as exc:
        print(f"radonosc: cannot write report: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out is None:
        sys.stdout.write(text)
    if not report.complete:
        print(f"radonosc: incomplete report: {report.message}", file=sys.stderr)
        return EXIT_BUDGET
    return EXIT_OK if report.all_pass else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
