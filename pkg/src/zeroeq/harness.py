"""Reproducible experiment harness: config -> training -> metrics CSV -> plot.

One experiment = `trials` independent seeded training runs of one
(game, estimator, scheme, dynamics) combination. Exploitability is
evaluated every `eval_every` iterations (and at the final iterate); its
evaluation cost is logged to a sidecar file and never mixed into the
training columns, so `utility_evals` in the metrics CSV measures training
alone. Reruns with the same config are byte-identical except for the
wall_time_s column.

Set ZEROEQ_THREADS=k to run trials on a k-thread pool; results are merged
in deterministic (trial, iteration) order either way.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import games
from .dynamics import DynamicsConfig, train
from .estimators import SmoothingConfig
from .exploit import BestResponseConfig, estimate_exploitability
from .seeding import derive_seed

GAMES = ("unit_demand", "knapsack", "sequential", "goofspiel", "quadratic", "first_price")

CSV_HEADER = "trial,iteration,wall_time_s,utility_evals,exploitability_raw,exploitability_clamped"
SIDECAR_HEADER = "trial,iteration,eval_utility_evals"

THREADS_ENV = "ZEROEQ_THREADS"


@dataclass(frozen=True)
class ExperimentConfig:
    game: str
    players: int
    iterations: int
    out: str
    items: int | None = None  # unit_demand
    rounds: int | None = None  # sequential / goofspiel
    estimator: str = "jpspg"
    scheme: str = "cd"
    dynamics: str = "sga"
    lr: float = 1e-4
    sigma: float = 0.1
    batch: int = 256
    hidden: int = 64
    trials: int = 8
    eval_every: int | None = None  # default: evaluate only at the final iteration
    br_iters: int = 1024
    eval_samples: int = 1024
    seed: int = 0

    def __post_init__(self):
        if self.game not in GAMES:
            raise ValueError(f"game must be one of {GAMES}, got {self.game!r}")
        if self.players < 1:
            raise ValueError("players must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.eval_every is not None and self.eval_every < 1:
            raise ValueError("eval-every must be positive")
        if self.game == "unit_demand" and (self.items is None or self.items < 1):
            raise ValueError("unit_demand requires --items >= 1")
        if self.game in ("sequential", "goofspiel") and self.rounds is not None and self.rounds < 1:
            raise ValueError("rounds must be positive")
        if self.game == "sequential" and self.rounds is None:
            raise ValueError("sequential requires --rounds")


def build_game(cfg: ExperimentConfig) -> games.GameDef:
    if cfg.game == "unit_demand":
        return games.unit_demand_auction(cfg.players, cfg.items, cfg.hidden)
    if cfg.game == "knapsack":
        return games.knapsack_auction(cfg.players, cfg.hidden)
    if cfg.game == "sequential":
        return games.sequential_auction(cfg.players, cfg.rounds, cfg.hidden)
    if cfg.game == "goofspiel":
        rounds = 13 if cfg.rounds is None else cfg.rounds
        return games.goofspiel(cfg.players, rounds, cfg.hidden)
    if cfg.game == "quadratic":
        return games.quadratic_game(cfg.players)
    if cfg.game == "first_price":
        return games.first_price_calibration(cfg.players, cfg.hidden)
    raise ValueError(f"unknown game {cfg.game!r}")


@dataclass(frozen=True)
class MetricsRow:
    trial: int
    iteration: int
    wall_time_s: float
    utility_evals: int
    exploitability_raw: float
    exploitability_clamped: float


def eval_points(iterations: int, eval_every: int | None) -> list[int]:
    """Iterations at which exploitability is measured (final always included)."""
    if eval_every is None:
        return [iterations]
    points = list(range(eval_every, iterations + 1, eval_every))
    if not points or points[-1] != iterations:
        points.append(iterations)
    return points


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    # Shortest decimal (positional, never scientific) that round-trips.
    return np.format_float_positional(float(value), unique=True, trim="0")


def write_csv(rows, path) -> None:
    """Metrics rows -> CSV with the fixed header; full-precision decimals."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            fh.write(
                ",".join(
                    [
                        _fmt(r.trial),
                        _fmt(r.iteration),
                        _fmt(r.wall_time_s),
                        _fmt(r.utility_evals),
                        _fmt(r.exploitability_raw),
                        _fmt(r.exploitability_clamped),
                    ]
                )
                + "\n"
            )


def read_csv(path) -> list[MetricsRow]:
    """Parse a metrics CSV, reporting the offending line on malformed input."""
    path = Path(path)
    rows = []
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}, line 1: expected header {CSV_HEADER!r}")
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise ValueError(f"{path}, line {lineno}: expected 6 fields, got {len(parts)}")
        try:
            rows.append(
                MetricsRow(
                    trial=int(parts[0]),
                    iteration=int(parts[1]),
                    wall_time_s=float(parts[2]),
                    utility_evals=int(parts[3]),
                    exploitability_raw=float(parts[4]),
                    exploitability_clamped=float(parts[5]),
                )
            )
        except ValueError as exc:
            raise ValueError(f"{path}, line {lineno}: {exc}") from None
    return rows


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    rows: list[MetricsRow]
    csv_path: Path
    sidecar_path: Path
    snapshot_paths: list[Path]


def _run_trial(cfg: ExperimentConfig, game: games.GameDef, trial: int):
    dyn = DynamicsConfig(
        method=cfg.dynamics, alpha=cfg.lr, iterations=cfg.iterations, optimizer="adabelief"
    )
    smooth = SmoothingConfig(sigma=cfg.sigma, scheme=cfg.scheme, batch_size=cfg.batch)
    br = BestResponseConfig(
        iterations=cfg.br_iters,
        batch_size=cfg.batch,
        sigma=cfg.sigma,
        lr=cfg.lr,
        scheme=cfg.scheme,
    )
    trial_seed = derive_seed(cfg.seed, "trial", trial)
    points = eval_points(cfg.iterations, cfg.eval_every)
    run = train(
        game,
        dyn,
        smooth,
        estimator=cfg.estimator,
        seed=trial_seed,
        snapshot_every=cfg.eval_every,
    )
    by_iter = {r.iteration: r for r in run.records}
    rows = []
    sidecar = []
    for it in points:
        snapshot = run.snapshots[it]
        report = estimate_exploitability(
            game,
            snapshot,
            br,
            cfg.eval_samples,
            derive_seed(cfg.seed, "eval", trial, it),
        )
        rec = by_iter[it]
        rows.append(
            MetricsRow(
                trial=trial,
                iteration=it,
                wall_time_s=rec.wall_time_s,
                utility_evals=rec.utility_evals,
                exploitability_raw=report.phi,
                exploitability_clamped=report.phi_clamped,
            )
        )
        sidecar.append((trial, it, report.utility_evals))
    return rows, sidecar, run.snapshots[cfg.iterations]


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run all trials, write metrics CSV + evaluation-cost sidecar + snapshots."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    game = build_game(cfg)

    threads = int(os.environ.get(THREADS_ENV, "1"))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda t: _run_trial(cfg, game, t), range(cfg.trials)))
    else:
        results = [_run_trial(cfg, game, t) for t in range(cfg.trials)]

    rows = [row for trial_rows, _, _ in results for row in trial_rows]
    sidecar = [entry for _, entries, _ in results for entry in entries]
    rows.sort(key=lambda r: (r.trial, r.iteration))
    sidecar.sort()

    csv_path = out / "metrics.csv"
    write_csv(rows, csv_path)

    sidecar_path = out / "eval_evals.csv"
    with open(sidecar_path, "w", newline="") as fh:
        fh.write(SIDECAR_HEADER + "\n")
        for trial, it, evals in sidecar:
            fh.write(f"{trial},{it},{evals}\n")

    snapshot_paths = []
    for trial, (_, _, final) in enumerate(results):
        p = out / f"trial{trial:02d}_final.npz"
        np.savez(
            p,
            **{f"block_{i:02d}": b for i, b in enumerate(final.blocks)},
            game=cfg.game,
            iteration=cfg.iterations,
            trial=trial,
        )
        snapshot_paths.append(p)

    return ExperimentResult(cfg, rows, csv_path, sidecar_path, snapshot_paths)


def sem(values: np.ndarray) -> float:
    """Standard error of the mean (ddof=1); nan for a single value."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        return float("nan")
    return float(values.std(ddof=1) / np.sqrt(values.size))


def emit_plot(csv_paths, x_axis: str, out_path) -> Path:
    """Mean clamped exploitability across trials, one curve per CSV, SEM band.

    x_axis is 'iteration' or 'wall_time_s' (trial-averaged per iteration).
    Writes a standalone SVG.
    """
    if x_axis not in ("iteration", "wall_time_s"):
        raise ValueError(f"x_axis must be 'iteration' or 'wall_time_s', got {x_axis!r}")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for path in csv_paths:
        rows = read_csv(path)
        if not rows:
            raise ValueError(f"{path}: no data rows")
        iters = sorted({r.iteration for r in rows})
        xs, ys, bands = [], [], []
        for it in iters:
            group = [r for r in rows if r.iteration == it]
            y = np.array([r.exploitability_clamped for r in group])
            x = (
                float(it)
                if x_axis == "iteration"
                else float(np.mean([r.wall_time_s for r in group]))
            )
            xs.append(x)
            ys.append(float(y.mean()))
            bands.append(sem(y))
        xs = np.array(xs)
        ys = np.array(ys)
        bands = np.array(bands)
        label = Path(path).parent.name + "/" + Path(path).stem
        (line,) = ax.plot(xs, ys, marker="o", markersize=3, label=label)
        if np.all(np.isfinite(bands)):
            ax.fill_between(xs, ys - bands, ys + bands, alpha=0.2, color=line.get_color())
    ax.set_xlabel("iteration" if x_axis == "iteration" else "training wall time [s]")
    ax.set_ylabel("exploitability (clamped)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, format="svg")
    plt.close(fig)
    return out_path


# --- flat key-value config files ----------------------------------------------

_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
_KEY_ALIASES = {"iters": "iterations"}  # config keys use the CLI flag spelling


def parse_config_file(path) -> dict:
    """Flat `key = value` file; keys use the CLI flag spelling (dashes ok)."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}, line {lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            key = _KEY_ALIASES.get(key, key)
            value = value.strip()
            if key not in _FIELD_TYPES:
                raise ValueError(f"{path}, line {lineno}: unknown key {key!r}")
            out[key] = value
    return out


def coerce_option(key: str, value):
    """String from a config file -> the type ExperimentConfig expects."""
    if not isinstance(value, str):
        return value
    kind = _FIELD_TYPES[key]
    if kind in ("int", "int | None"):
        return int(value)
    if kind == "float":
        return float(value)
    return value
