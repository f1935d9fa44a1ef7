"""Exploitability of a strategy profile, estimated with evolution strategies.

For each player i an approximate best response is trained against the
frozen opponents by pseudo-gradient ascent on that player's own payoff;
the regret R_i = b_i - u_i(s) compares the best-response payoff b_i with
the player's payoff under the current profile. The sum Phi = sum_i R_i is
reported both raw and with each regret clamped at zero (training noise can
push individual regret estimates slightly negative).

Both payoff estimates reuse one fixed set of evaluation seeds (common
random numbers), and every utility evaluation spent (best-response training
plus measurement) is counted in the report.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .estimators import JointParams, SmoothingConfig, eval_count, pseudo_gradient_scalar
from .optim import adabelief_init, adabelief_update, sgd_update
from .seeding import SEED_BOUND, derive_seed, make_rng

if TYPE_CHECKING:  # pragma: no cover
    from .games import GameDef, Policy


@dataclass(frozen=True)
class BestResponseConfig:
    iterations: int = 1024
    batch_size: int = 256
    sigma: float = 0.1
    lr: float = 1e-4
    scheme: str = "cd"
    optimizer: str = "adabelief"
    warm_start: bool = False

    def __post_init__(self):
        if not isinstance(self.iterations, (int, np.integer)) or self.iterations < 0:
            raise ValueError(f"iterations must be a non-negative integer, got {self.iterations}")
        if self.optimizer not in ("adabelief", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        # sigma/scheme/batch_size are validated by the SmoothingConfig built per step.


def best_response_eval_count(cfg: BestResponseConfig) -> int:
    """Utility evaluations consumed by one best-response training run."""
    return cfg.iterations * eval_count(cfg.scheme, cfg.batch_size)


def _own_payoff_fns(game: "GameDef", x: JointParams, player: int):
    """Scalar payoff of `player` as a function of its own block, opponents frozen."""

    def f(block: np.ndarray, seed: int) -> float:
        return float(game.utility(x.with_block(player, block), seed)[player])

    dims = game.param_dims
    offsets = np.cumsum([0, *dims])
    lo, hi = int(offsets[player]), int(offsets[player + 1])
    xflat = x.concat()

    def f_batch(rows: np.ndarray, seeds) -> np.ndarray:
        full = np.tile(xflat, (rows.shape[0], 1))
        full[:, lo:hi] = rows
        return game.utility_batch(full, seeds)[:, player]

    return f, f_batch


def train_best_response(
    game: "GameDef",
    x: JointParams,
    player: int,
    cfg: BestResponseConfig,
    seed: int,
    response_policy: "Policy | None" = None,
) -> np.ndarray:
    """Approximate best response of one player against the frozen profile.

    Starts from a fresh initialisation (or the player's current block when
    warm_start is set) and ascends the player's own payoff with the scalar
    pseudo-gradient estimator. When `response_policy` is given the player's
    policy is replaced first, so analytic (parameter-free) players can be
    best-responded against with a trainable network.
    """
    if response_policy is not None:
        game = game.with_policy(player, response_policy)
        # Placeholder of the new width; the payoff closure substitutes the
        # candidate block on every evaluation anyway.
        x = x.with_block(player, np.zeros(game.param_dims[player]))
    if cfg.warm_start:
        block = x.blocks[player].copy()
        if block.size != game.param_dims[player]:
            raise ValueError("warm start requires a block of the trained policy's width")
    else:
        block = game.init_block(player, derive_seed(seed, "init"))
    if block.size == 0:
        return block

    smooth = SmoothingConfig(sigma=cfg.sigma, scheme=cfg.scheme, batch_size=cfg.batch_size)
    f, f_batch = _own_payoff_fns(game, x, player)
    opt_state = adabelief_init(block.size, cfg.lr) if cfg.optimizer == "adabelief" else None
    for t in range(cfg.iterations):
        est = pseudo_gradient_scalar(f, block, smooth, derive_seed(seed, "iter", t), f_batch)
        g = est.blocks[0]
        if opt_state is None:
            block = block + sgd_update(cfg.lr, g)
        else:
            opt_state, delta = adabelief_update(opt_state, g)
            block = block + delta
    return block


@dataclass(frozen=True)
class ExploitabilityReport:
    br_utilities: np.ndarray  # b_i: payoff of the trained response, per player
    current_utilities: np.ndarray  # u_i(s) under the evaluated profile
    regrets: np.ndarray  # b_i - u_i(s), unclamped
    phi: float  # sum of raw regrets
    phi_clamped: float  # sum of regrets clamped at zero
    samples_used: int  # Monte Carlo samples per payoff estimate
    utility_evals: int  # total evaluations spent (training + measurement)


def estimate_exploitability(
    game: "GameDef",
    x: JointParams,
    cfg: BestResponseConfig,
    eval_samples: int,
    seed: int,
    response_policies=None,
) -> ExploitabilityReport:
    """Estimate Phi = sum_i [u_i(BR_i, s_-i) - u_i(s)] for the profile x."""
    if eval_samples < 1:
        raise ValueError(f"eval_samples must be positive, got {eval_samples}")
    n = game.n_players
    eval_seeds = make_rng(seed, "measure").integers(SEED_BOUND, size=eval_samples)

    current = game.utility_batch(np.tile(x.concat(), (eval_samples, 1)), eval_seeds).mean(axis=0)

    br_utilities = np.empty(n)
    spent = (n + 1) * eval_samples
    for i in range(n):
        policy = None if response_policies is None else response_policies[i]
        block = train_best_response(game, x, i, cfg, derive_seed(seed, "br", i), policy)
        spent += best_response_eval_count(cfg)
        measured_game = game if policy is None else game.with_policy(i, policy)
        profile = JointParams(
            tuple(block if j == i else x.blocks[j] for j in range(n))
        )
        rows = np.tile(profile.concat(), (eval_samples, 1))
        br_utilities[i] = measured_game.utility_batch(rows, eval_seeds)[:, i].mean()

    regrets = br_utilities - current
    return ExploitabilityReport(
        br_utilities=br_utilities,
        current_utilities=current,
        regrets=regrets,
        phi=float(np.sum(regrets)),
        phi_clamped=float(np.sum(np.clip(regrets, 0.0, None))),
        samples_used=eval_samples,
        utility_evals=spent,
    )
