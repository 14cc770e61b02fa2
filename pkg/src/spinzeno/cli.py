"""Command-line entry point.

    spinzeno <subcommand> [--config PATH] [--seed N] [--out DIR]

Subcommands: model-a, model-b, zeno-compare, gs-report, plot.
``--print-defaults`` emits the stock parameter set of the subcommand.
Exit codes: 0 success, 2 configuration error, 3 capacity error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .errors import CapacityError, ConfigurationError, NumericalFailure
from .harness import config_to_text, default_config, parse_config_text, run

_SUBCOMMANDS = {
    "model-a": "model_a",
    "model-b": "model_b",
    "zeno-compare": "zeno_compare",
    "gs-report": "ground_state_report",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinzeno",
        description="exact dynamics of local decoherence in small spin-1/2 magnets",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=Path, help="key = value config file")
        p.add_argument("--seed", type=int, help="override the run seed")
        p.add_argument("--out", type=Path, help="override the output directory")
        p.add_argument(
            "--print-defaults",
            action="store_true",
            help="print the default config for this subcommand and exit",
        )
    plot = sub.add_parser("plot", help="render figures from a finished run")
    plot.add_argument("--run", type=Path, required=True, help="run output directory")
    plot.add_argument("--out", type=Path, help="figure directory (default: run dir)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "plot":
            from .plotting import render_run

            paths = render_run(args.run, args.out)
            for path in paths:
                print(path)
            return 0
        model = _SUBCOMMANDS[args.command]
        cfg = default_config(model)
        if args.print_defaults:
            sys.stdout.write(config_to_text(cfg))
            return 0
        if args.config is not None:
            cfg = parse_config_text(args.config.read_text(encoding="utf-8"), cfg)
            if cfg.model != model:
                raise ConfigurationError(
                    f"config declares model {cfg.model!r} but subcommand "
                    f"is {args.command!r}"
                )
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
        manifest = run(cfg, args.out)
        out = args.out if args.out is not None else Path(cfg.output_dir)
        print(f"run complete: {out} ({manifest.wall_clock_s:.1f} s)")
        return 0
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
