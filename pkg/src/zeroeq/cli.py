"""Command line entry point.

    zeroeq solve --game quadratic --players 4 --iters 2000 --out runs/quad
    zeroeq plot --x iteration --out curves.svg runs/quad/metrics.csv ...

`solve` also accepts --config FILE holding flat `key = value` lines with the
same names as the flags; explicit flags win over the file, the file wins over
built-in defaults. Bad usage exits 2 (argparse convention); a runtime failure
writes the traceback to <out>/error.txt and exits 1.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from pathlib import Path

from .harness import (
    GAMES,
    ExperimentConfig,
    coerce_option,
    emit_plot,
    parse_config_file,
    run_experiment,
)

_SENTINEL = object()

# (flag, dest, type, default) for everything forwarded into ExperimentConfig.
_SOLVE_OPTIONS = [
    ("--game", "game", str, _SENTINEL),
    ("--players", "players", int, _SENTINEL),
    ("--items", "items", int, None),
    ("--rounds", "rounds", int, None),
    ("--estimator", "estimator", str, "jpspg"),
    ("--scheme", "scheme", str, "cd"),
    ("--dynamics", "dynamics", str, "sga"),
    ("--lr", "lr", float, 1e-4),
    ("--sigma", "sigma", float, 0.1),
    ("--batch", "batch", int, 256),
    ("--hidden", "hidden", int, 64),
    ("--iters", "iterations", int, _SENTINEL),
    ("--trials", "trials", int, 8),
    ("--eval-every", "eval_every", int, None),
    ("--br-iters", "br_iters", int, 1024),
    ("--eval-samples", "eval_samples", int, 1024),
    ("--seed", "seed", int, 0),
    ("--out", "out", str, _SENTINEL),
]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zeroeq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="train strategies and log exploitability")
    solve.add_argument("--config", type=str, default=None, help="key = value option file")
    for flag, dest, kind, _default in _SOLVE_OPTIONS:
        extra = {}
        if dest == "game":
            extra["choices"] = GAMES
        if dest == "estimator":
            extra["choices"] = ("jpspg", "spg")
        if dest == "scheme":
            extra["choices"] = ("sp", "fd", "cd")
        if dest == "dynamics":
            extra["choices"] = ("sga", "oga", "eg")
        # Defaults resolve after the config file is merged, so every flag
        # starts unset here.
        solve.add_argument(flag, dest=dest, type=kind, default=_SENTINEL, **extra)

    plot = sub.add_parser("plot", help="render exploitability curves from metrics CSVs")
    plot.add_argument("--x", dest="x_axis", choices=("iteration", "wall_time_s"), default="iteration")
    plot.add_argument("--out", required=True, help="output SVG path")
    plot.add_argument("csvs", nargs="+", help="metrics.csv files to overlay")
    return parser


def _resolve_solve_config(args, parser) -> ExperimentConfig:
    options = {}
    if args.config is not None:
        try:
            file_options = parse_config_file(args.config)
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
        for key, value in file_options.items():
            try:
                options[key] = coerce_option(key, value)
            except ValueError:
                parser.error(f"config {args.config}: bad value for {key}: {value!r}")
    for _flag, dest, _kind, default in _SOLVE_OPTIONS:
        given = getattr(args, dest)
        if given is not _SENTINEL:
            options[dest] = given  # explicit flag wins
        elif dest not in options:
            if default is _SENTINEL:
                parser.error(f"missing required option --{dest.replace('_', '-')}")
            options[dest] = default
    try:
        return ExperimentConfig(**options)
    except ValueError as exc:
        parser.error(str(exc))


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    if args.command == "plot":
        try:
            emit_plot(args.csvs, args.x_axis, args.out)
        except (OSError, ValueError) as exc:
            print(f"zeroeq plot: {exc}", file=sys.stderr)
            return 1
        print(f"wrote {args.out}")
        return 0

    cfg = _resolve_solve_config(args, parser)
    try:
        result = run_experiment(cfg)
    except Exception:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "error.txt").write_text(traceback.format_exc())
        print(f"zeroeq solve: failed, traceback in {out / 'error.txt'}", file=sys.stderr)
        return 1
    print(f"wrote {result.csv_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
