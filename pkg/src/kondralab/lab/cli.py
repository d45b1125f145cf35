"""Command-line front end: one subcommand per experiment kind."""

from __future__ import annotations

import argparse

from .config import EXPERIMENT_KINDS
from .experiments import run_experiment

_HELP = {
    "mesh": "build one graded mesh and report its quality",
    "solve": "solve a manufactured problem on one mesh",
    "converge": "run a refinement study and fit convergence rates",
    "hardy": "estimate discrete Hardy constants across levels",
    "stability": "sweep the data-shift s and track solution/data norm ratios",
    "geometry-check": "probe admissibility, curvature, completeness and symbols",
    "norms-check": "compare the two weighted-norm routes on a function catalog",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kondra-lab",
        description="numerical laboratory for elliptic problems on singular domains",
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in EXPERIMENT_KINDS:
        p = sub.add_parser(kind, help=_HELP[kind])
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--out", default=None, help="output directory (overrides config)")
        p.add_argument("--levels", type=int, default=None,
                       help="number of levels (overrides config)")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run_experiment(args.config, kind=args.kind, out=args.out,
                          levels=args.levels, quiet=args.quiet)


if __name__ == "__main__":
    raise SystemExit(main())
