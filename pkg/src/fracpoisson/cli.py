"""Command line entry point: ``fracpoisson <experiment> [flags]``.

Settings come from ``--config FILE`` (``key = value`` lines) and are then
overridden by any flag given explicitly.  The exit status is 0 exactly
when every verdict in the report passes.
"""

from __future__ import annotations

import argparse
import sys

from .lab import EXPERIMENTS, ExperimentConfig, read_config_file, run_experiment

FLAGS = (
    ("--alpha", float, "fractional order in (0, 1)"),
    ("--a", float, "geometric base of the lacunary sequence"),
    ("--rho", float, "lacunarity (used as the base when --a is absent)"),
    ("--M", int, "truncation level"),
    ("--p", float, "Lebesgue exponent"),
    ("--q", float, "exponent of the maximal term (Cotlar)"),
    ("--eps", float, "epsilon of growth variant b"),
    ("--variant", str, "growth variant: a, b or c"),
    ("--function", str, "ladder function for converge: bump or indicator"),
    ("--k0", int, "largest radius 2^-k0 for growth"),
    ("--grid-lo", float, "grid left end"),
    ("--grid-hi", float, "grid right end"),
    ("--grid-step", float, "grid step"),
    ("--rel-tol", float, "quadrature relative tolerance"),
    ("--abs-tol", float, "quadrature absolute tolerance"),
    ("--out", str, "output directory"),
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracpoisson", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="file of key = value lines")
        for flag, typ, text in FLAGS:
            sp.add_argument(flag, type=typ, default=None, help=text)
    return parser


def config_from_args(args) -> ExperimentConfig:
    values = read_config_file(args.config) if args.config else {}
    for flag, _, _ in FLAGS:
        key = flag[2:].replace("-", "_")
        val = getattr(args, key)
        if val is not None:
            values[key] = val
    return ExperimentConfig.from_mapping(args.experiment, values)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (ValueError, OSError) as exc:
        parser.error(str(exc))
    report = run_experiment(cfg)
    for v in report.verdicts:
        print(v.line())
    print(f"report: {cfg.out}/report.txt")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
