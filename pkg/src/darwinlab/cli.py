"""Command-line entry point.

    darwinlab <experiment> [--config FILE] [--set key=value ...]
              [--out DIR] [--threads K] [--seed S]

Exit codes: 0 success, 2 configuration error, 3 infeasible size,
4 invariant violation during the run.
"""

from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, ConfigError, InfeasibleError, build_config, validate
from .experiments import InvariantViolation, run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="darwinlab",
        description="Reproduce system-environment redundancy experiments at desk scale.",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", metavar="FILE", help="TOML configuration file")
    parser.add_argument(
        "--set",
        metavar="KEY=VALUE",
        action="append",
        default=[],
        dest="overrides",
        help="override a config field, e.g. --set N=12 or --set ldp.n_rate=10",
    )
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--threads", type=int, metavar="K")
    parser.add_argument("--seed", type=int, metavar="S")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = build_config(args.experiment, args.config, args.overrides)
        if args.out is not None:
            cfg.output_dir = args.out
        if args.threads is not None:
            cfg.threads = args.threads
        if args.seed is not None:
            cfg.seed = args.seed
        validate(cfg)
    except InfeasibleError as exc:
        print(f"infeasible size: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    try:
        manifest = run(cfg)
    except InfeasibleError as exc:
        print(f"infeasible size: {exc}", file=sys.stderr)
        return 3
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 4
    print(f"{cfg.experiment}: wrote {', '.join(manifest['files'])} to {cfg.output_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
