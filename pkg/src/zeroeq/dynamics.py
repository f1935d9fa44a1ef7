"""Equilibrium-seeking dynamics driven by estimated pseudo-gradients.

All methods are simultaneous ascent on every player's own utility:

* sga: x <- x + step(g)
* oga: the optimistic correction g_t + (beta/alpha) * (g_t - g_{t-1}) is
  folded into the gradient handed to the optimizer (first step uses
  g_{-1} := g_0 and therefore coincides with sga)
* eg:  a plain half-step x~ = x + alpha * g(x), then the optimizer step
  taken from g(x~); two gradient estimates per iteration

``step(g)`` is the configured optimizer: plain sgd (alpha * g) or
AdaBelief with learning rate alpha and one state per player block.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np

from .estimators import (
    GradientEstimate,
    JointParams,
    SmoothingConfig,
    jpspg_estimate,
    spg_estimate,
)
from .optim import OptimizerState, adabelief_init, adabelief_update, sgd_update
from .seeding import derive_seed

if TYPE_CHECKING:  # pragma: no cover
    from .games import GameDef

METHODS = ("sga", "oga", "eg")
OPTIMIZERS = ("adabelief", "sgd")
ESTIMATORS = ("spg", "jpspg")


@dataclass(frozen=True)
class DynamicsConfig:
    method: str = "sga"
    alpha: float = 1e-4
    beta: float | None = None  # oga extrapolation weight; defaults to alpha
    iterations: int = 1
    optimizer: str = "adabelief"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha}")
        if self.beta is not None and not (np.isfinite(self.beta) and self.beta >= 0):
            raise ValueError(f"beta must be non-negative and finite, got {self.beta}")
        if not isinstance(self.iterations, (int, np.integer)) or self.iterations < 1:
            raise ValueError(f"iterations must be a positive integer, got {self.iterations}")


@dataclass(frozen=True)
class TrainState:
    x: JointParams
    t: int = 0
    prev_grad: tuple[np.ndarray, ...] | None = None
    opt_states: tuple[OptimizerState, ...] | None = None


def init_state(cfg: DynamicsConfig, x0: JointParams) -> TrainState:
    opt_states = None
    if cfg.optimizer == "adabelief":
        opt_states = tuple(adabelief_init(d, cfg.alpha) for d in x0.dims)
    return TrainState(x=x0, opt_states=opt_states)


def _check_estimate(state: TrainState, estimate: GradientEstimate) -> None:
    if estimate.dims != state.x.dims:
        raise ValueError(
            f"gradient dims {estimate.dims} do not match parameters {state.x.dims}"
        )


def _optimizer_step(
    cfg: DynamicsConfig, state: TrainState, direction: tuple[np.ndarray, ...]
) -> tuple[JointParams, tuple[OptimizerState, ...] | None]:
    if cfg.optimizer == "sgd":
        deltas = [sgd_update(cfg.alpha, g) for g in direction]
        return (
            JointParams(tuple(b + d for b, d in zip(state.x.blocks, deltas))),
            None,
        )
    new_states = []
    deltas = []
    for st, g in zip(state.opt_states, direction):
        st, delta = adabelief_update(st, g)
        new_states.append(st)
        deltas.append(delta)
    return (
        JointParams(tuple(b + d for b, d in zip(state.x.blocks, deltas))),
        tuple(new_states),
    )


def sga_step(cfg: DynamicsConfig, state: TrainState, estimate: GradientEstimate) -> TrainState:
    """Simultaneous gradient ascent with the configured optimizer."""
    _check_estimate(state, estimate)
    x, opt_states = _optimizer_step(cfg, state, estimate.blocks)
    return TrainState(x=x, t=state.t + 1, prev_grad=None, opt_states=opt_states)


def oga_step(cfg: DynamicsConfig, state: TrainState, estimate: GradientEstimate) -> TrainState:
    """Optimistic ascent: extrapolated gradient fed to the optimizer."""
    _check_estimate(state, estimate)
    beta = cfg.alpha if cfg.beta is None else cfg.beta
    prev = estimate.blocks if state.prev_grad is None else state.prev_grad
    ratio = beta / cfg.alpha
    direction = tuple(
        g + ratio * (g - p) for g, p in zip(estimate.blocks, prev)
    )
    x, opt_states = _optimizer_step(cfg, state, direction)
    return TrainState(
        x=x,
        t=state.t + 1,
        prev_grad=tuple(g.copy() for g in estimate.blocks),
        opt_states=opt_states,
    )


def eg_step(
    cfg: DynamicsConfig,
    state: TrainState,
    estimate_fn: Callable[[JointParams], GradientEstimate],
) -> tuple[TrainState, int]:
    """Extragradient: estimate at the half-step point, step from the origin.

    Returns (new state, utility evaluations consumed by both estimates).
    """
    g1 = estimate_fn(state.x)
    _check_estimate(state, g1)
    x_half = JointParams(
        tuple(b + cfg.alpha * g for b, g in zip(state.x.blocks, g1.blocks))
    )
    g2 = estimate_fn(x_half)
    _check_estimate(state, g2)
    x, opt_states = _optimizer_step(cfg, state, g2.blocks)
    return (
        TrainState(x=x, t=state.t + 1, prev_grad=None, opt_states=opt_states),
        g1.utility_evals + g2.utility_evals,
    )


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    wall_time_s: float  # cumulative training time, exploitability excluded
    utility_evals: int  # cumulative training evaluations


@dataclass(frozen=True)
class TrainRun:
    records: list[IterationRecord]
    snapshots: dict[int, JointParams]
    final: TrainState


def _resolve_estimator(estimator) -> Callable:
    if callable(estimator):
        return estimator
    if estimator == "spg":
        return spg_estimate
    if estimator == "jpspg":
        return jpspg_estimate
    raise ValueError(f"estimator must be one of {ESTIMATORS} or a callable, got {estimator!r}")


def train(
    game: "GameDef",
    dyn_cfg: DynamicsConfig,
    smooth_cfg: SmoothingConfig,
    estimator="jpspg",
    seed: int = 0,
    snapshot_every: int | None = None,
    initial: JointParams | None = None,
) -> TrainRun:
    """Run the configured dynamics; deterministic given the seed.

    Records cumulative wall time and utility evaluations per iteration.
    Snapshots hold the initial profile (iteration 0), every snapshot_every-th
    iterate when requested, and always the final one.
    """
    est_fn = _resolve_estimator(estimator)
    x0 = game.init_params(derive_seed(seed, "init")) if initial is None else initial
    state = init_state(dyn_cfg, x0)
    snapshots = {0: x0.copy()}
    records: list[IterationRecord] = []
    cum_evals = 0
    cum_time = 0.0
    for t in range(1, dyn_cfg.iterations + 1):
        t0 = time.perf_counter()
        if dyn_cfg.method == "eg":
            seeds = iter((derive_seed(seed, "iter", t, 0), derive_seed(seed, "iter", t, 1)))
            state, evals = eg_step(
                dyn_cfg, state, lambda p: est_fn(game, p, smooth_cfg, next(seeds))
            )
        else:
            estimate = est_fn(game, state.x, smooth_cfg, derive_seed(seed, "iter", t))
            if dyn_cfg.method == "sga":
                state = sga_step(dyn_cfg, state, estimate)
            else:
                state = oga_step(dyn_cfg, state, estimate)
            evals = estimate.utility_evals
        cum_time += time.perf_counter() - t0
        cum_evals += evals
        records.append(IterationRecord(t, cum_time, cum_evals))
        if snapshot_every is not None and t % snapshot_every == 0:
            snapshots[t] = state.x.copy()
    snapshots[dyn_cfg.iterations] = state.x.copy()
    return TrainRun(records=records, snapshots=snapshots, final=state)
