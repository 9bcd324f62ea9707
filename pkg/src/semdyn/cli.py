"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import sys

from .gll import GllError
from .mapping import MappingError
from .propagator import PropagationError
from .spectral import SolverError

NUMERICAL_ERRORS = (GllError, MappingError, PropagationError, SolverError)


def _add_common(p):
    p.add_argument("--config", help="INI run configuration")
    p.add_argument("--out", default="runs/out", help="output directory")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="semdyn",
        description="Adaptive multi-domain spectral-element quantum dynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nodes", help="print a GLL quadrature rule")
    p.add_argument("order", type=int)
    p.add_argument("--out", default=None)

    for name, txt in (
        ("bound-states", "eigenvalue benchmark"),
        ("hhg", "driven run: dipole, spectrum, Gabor"),
        ("scan", "relative phase / rotation-angle scan"),
        ("optimize", "sequential coefficient optimization"),
        ("benchmark", "sparsity and spectral-interval table"),
    ):
        p = sub.add_parser(name, help=txt)
        _add_common(p)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    from . import runner

    try:
        if args.command == "nodes":
            if args.order < 1:
                print("error: order must be >= 1", file=sys.stderr)
                return 2
            runner.run_nodes(args.order, args.out)
            return 0
        if not args.config:
            print("error: --config is required", file=sys.stderr)
            return 2
        cfg = runner.parse_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        expected = args.command
        if cfg.experiment != expected:
            print(
                f"error: config declares experiment {cfg.experiment!r}, "
                f"command is {expected!r}",
                file=sys.stderr,
            )
            return 2
        if args.command == "bound-states":
            runner.run_bound_states(cfg, args.out)
        elif args.command == "hhg":
            runner.run_hhg(cfg, args.out)
        elif args.command == "scan":
            runner.run_scan(cfg, args.out, threads=args.threads)
        elif args.command == "optimize":
            runner.run_optimize(cfg, args.out)
        elif args.command == "benchmark":
            runner.run_benchmark(cfg, args.out)
        return 0
    except runner.ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
