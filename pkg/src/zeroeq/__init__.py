"""Zeroth-order equilibrium finding for black-box games.

Gradient-free simultaneous-play training: each player's pseudo-gradient is
estimated from utility evaluations alone, either with one shared joint
perturbation across all players (cost per sample independent of the player
count) or with the classical per-player perturbation. Ships smoothed-game
dynamics (simultaneous / optimistic / extragradient ascent), a collection of
auction-style benchmark games with exact combinatorial sub-solvers, and an
exploitability estimator for judging the result.
"""

from .dynamics import DynamicsConfig, IterationRecord, TrainRun, TrainState, train
from .estimators import (
    GradientEstimate,
    JointParams,
    SmoothingConfig,
    eval_count,
    jpspg_estimate,
    pseudo_gradient_scalar,
    spg_estimate,
)
from .exploit import (
    BestResponseConfig,
    ExploitabilityReport,
    best_response_eval_count,
    estimate_exploitability,
    train_best_response,
)
from .games import (
    FixedPolicy,
    GameDef,
    NetPolicy,
    first_price_calibration,
    goofspiel,
    knapsack_auction,
    quadratic_game,
    sequential_auction,
    symmetric_equilibrium_bid,
    unit_demand_auction,
)
from .harness import ExperimentConfig, run_experiment
from .nets import NetSpec, forward, init_params, param_count
from .optim import adabelief_init, adabelief_update
from .seeding import derive_seed, make_rng
from .solvers import solve_assignment, solve_knapsack

__version__ = "0.1.0"

__all__ = [
    "BestResponseConfig",
    "DynamicsConfig",
    "ExperimentConfig",
    "ExploitabilityReport",
    "FixedPolicy",
    "GameDef",
    "GradientEstimate",
    "IterationRecord",
    "JointParams",
    "NetPolicy",
    "NetSpec",
    "SmoothingConfig",
    "TrainRun",
    "TrainState",
    "adabelief_init",
    "adabelief_update",
    "best_response_eval_count",
    "derive_seed",
    "estimate_exploitability",
    "eval_count",
    "first_price_calibration",
    "forward",
    "goofspiel",
    "init_params",
    "jpspg_estimate",
    "knapsack_auction",
    "make_rng",
    "param_count",
    "pseudo_gradient_scalar",
    "quadratic_game",
    "run_experiment",
    "sequential_auction",
    "solve_assignment",
    "solve_knapsack",
    "spg_estimate",
    "symmetric_equilibrium_bid",
    "train",
    "train_best_response",
    "unit_demand_auction",
]
