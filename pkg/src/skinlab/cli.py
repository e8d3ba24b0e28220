"""Command-line experiment runner.

Exit codes: 0 success, 1 validation error (bad config, unknown preset,
unwritable output), 2 numeric failure (solver did not converge or produced
untrustworthy results).  `SKINLAB_THREADS` overrides `--threads`.
"""

from __future__ import annotations

import argparse
import sys

from .errors import NumericError, ValidationError
from .experiments import CONFIG_REFERENCE, PRESET_NAMES, parse_config, preset, run


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skinlab",
        description="Asymmetric-hopping lattice experiments: spectra, "
        "exceptional-point sweeps, fidelity decay, Loschmidt echoes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser(
        "run",
        help="run an experiment described by a config file",
        epilog=CONFIG_REFERENCE,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    run_p.add_argument("config", help="path to the INI config file")
    run_p.add_argument("--threads", type=int, default=None,
                       help="worker processes (default: all cores)")
    run_p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="override the config's output format")
    run_p.add_argument("--out", default=None, help="override the config's output directory")

    pre_p = sub.add_parser("preset", help="run a named figure preset")
    pre_p.add_argument("name", help=f"one of: {', '.join(PRESET_NAMES)}")
    pre_p.add_argument("--out", default=None, help="output directory (default: out/<name>)")
    pre_p.add_argument("--threads", type=int, default=None,
                       help="worker processes (default: all cores)")
    pre_p.add_argument("--format", choices=("csv", "json"), default=None,
                       help="output format (default: csv)")

    sub.add_parser("list-presets", help="list the known figure presets")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "list-presets":
            for name in PRESET_NAMES:
                cfg = preset(name)
                print(f"{name:7s} {cfg.experiment}")
            return 0
        if args.command == "run":
            config = parse_config(args.config)
        else:
            config = preset(args.name, out_dir=args.out)
        if getattr(args, "out", None) and args.command == "run":
            config.out_dir = args.out
        if args.format:
            config.out_format = args.format
        datasets = run(config, threads=args.threads)
        for ds in datasets:
            print(ds.path)
        return 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
