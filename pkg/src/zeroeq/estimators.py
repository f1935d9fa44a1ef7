"""Zeroth-order pseudo-gradient estimators for black-box vector utilities.

A game only exposes u(x, seed) -> R^n (one utility per player). Smoothing
the joint strategy profile with Gaussian noise z ~ N(0, I) makes the
pseudo-gradient estimable from utility values alone. Two estimators are
provided:

* ``spg_estimate`` perturbs each player's block separately and reads that
  player's utility: n evaluation passes per sample.
* ``jpspg_estimate`` perturbs the whole concatenated profile once and
  reads every player's own component against its own slice of z, using the
  identity diag(a (outer) b) = a * b: evaluation cost per sample is
  independent of the player count.

Each comes in single-point (sp), forward-difference (fd) and
centered-difference (cd) forms with exact utility-evaluation accounting:

    scalar/jpspg:  sp = batch,   fd = batch + 1,    cd = 2 * batch
    spg:           sp = n*batch, fd = n*batch + 1,  cd = 2 * n * batch

Game randomness is drawn from a stream independent of the perturbation
stream; a cd pair (+sigma*z / -sigma*z) shares one game seed, as do the
per-player evaluations inside one spg sample (common random numbers).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np

from .seeding import SEED_BOUND, make_rng

if TYPE_CHECKING:  # pragma: no cover
    from .games import GameDef

SCHEMES = ("sp", "fd", "cd")


@dataclass(frozen=True)
class SmoothingConfig:
    sigma: float = 0.1
    scheme: str = "cd"
    batch_size: int = 256

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not isinstance(self.batch_size, (int, np.integer)) or self.batch_size < 1:
            raise ValueError(f"batch_size must be a positive integer, got {self.batch_size}")


@dataclass(frozen=True)
class JointParams:
    """Per-player flat parameter blocks forming one joint strategy profile."""

    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        blocks = tuple(np.asarray(b, dtype=np.float64) for b in self.blocks)
        for b in blocks:
            if b.ndim != 1:
                raise ValueError(f"parameter blocks must be 1-D, got shape {b.shape}")
            if not np.all(np.isfinite(b)):
                raise ValueError("non-finite parameter block")
        object.__setattr__(self, "blocks", blocks)

    @property
    def n_players(self) -> int:
        return len(self.blocks)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.size for b in self.blocks)

    @property
    def size(self) -> int:
        return sum(b.size for b in self.blocks)

    def concat(self) -> np.ndarray:
        if not self.blocks:
            return np.zeros(0)
        return np.concatenate(self.blocks)

    @classmethod
    def from_concat(cls, flat: np.ndarray, dims) -> "JointParams":
        flat = np.asarray(flat, dtype=np.float64)
        offsets = np.cumsum([0, *dims])
        if flat.ndim != 1 or flat.size != offsets[-1]:
            raise ValueError(f"flat vector of size {flat.size} does not match dims {tuple(dims)}")
        return cls(tuple(flat[offsets[i] : offsets[i + 1]] for i in range(len(dims))))

    def with_block(self, player: int, values: np.ndarray) -> "JointParams":
        blocks = list(self.blocks)
        blocks[player] = np.asarray(values, dtype=np.float64)
        return JointParams(tuple(blocks))

    def copy(self) -> "JointParams":
        return JointParams(tuple(b.copy() for b in self.blocks))


@dataclass(frozen=True)
class GradientEstimate:
    """Per-player gradient blocks plus the exact number of utility evaluations spent."""

    blocks: tuple[np.ndarray, ...]
    utility_evals: int

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.size for b in self.blocks)

    def concat(self) -> np.ndarray:
        return np.concatenate(self.blocks) if self.blocks else np.zeros(0)


def diag_of_outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """diag(a (outer) b) = a * b, elementwise."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise ValueError(f"need equal-length vectors, got {a.shape} and {b.shape}")
    return a * b


def eval_count(scheme: str, batch_size: int, n_players: int = 1) -> int:
    """Closed-form utility-evaluation count for one estimate.

    Use n_players=1 for the scalar and joint-perturbation estimators.
    """
    if scheme == "sp":
        return n_players * batch_size
    if scheme == "fd":
        return n_players * batch_size + 1
    if scheme == "cd":
        return 2 * n_players * batch_size
    raise ValueError(f"unknown scheme {scheme!r}")


def _block_slices(dims) -> list[slice]:
    offsets = np.cumsum([0, *dims])
    return [slice(int(offsets[i]), int(offsets[i + 1])) for i in range(len(dims))]


def _draw(cfg: SmoothingConfig, total_dim: int, seed: int):
    """Perturbations, per-sample game seeds, and the fd baseline seed.

    The baseline seed, when needed, is the first draw from the game stream.
    """
    z_rng = make_rng(seed, "perturb")
    game_rng = make_rng(seed, "game")
    baseline_seed = int(game_rng.integers(SEED_BOUND)) if cfg.scheme == "fd" else None
    game_seeds = game_rng.integers(SEED_BOUND, size=cfg.batch_size)
    z = z_rng.standard_normal((cfg.batch_size, total_dim))
    return z, game_seeds, baseline_seed


# --- sample-level cores (explicit perturbations; used by the public estimators
# --- and directly by variance/bias studies) ---------------------------------


def scalar_samples(
    f: Callable[[np.ndarray, int], float],
    x: np.ndarray,
    sigma: float,
    scheme: str,
    z: np.ndarray,
    game_seeds: np.ndarray,
    baseline_seed: int | None = None,
    f_batch: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
) -> np.ndarray:
    """Per-sample pseudo-gradient rows (batch, d) for a scalar black box."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] != x.size:
        raise ValueError(f"z must be (batch, {x.size}), got {z.shape}")

    if f_batch is None:
        def f_batch(rows, seeds):
            return np.array([f(r, int(s)) for r, s in zip(rows, seeds)])

    up = np.asarray(f_batch(x[None, :] + sigma * z, game_seeds), dtype=np.float64)
    if scheme == "cd":
        um = np.asarray(f_batch(x[None, :] - sigma * z, game_seeds), dtype=np.float64)
        coef = (up - um) / (2.0 * sigma)
    elif scheme == "fd":
        base = float(f(x, int(baseline_seed)))
        coef = (up - base) / sigma
    elif scheme == "sp":
        coef = up / sigma
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return coef[:, None] * z


def jpspg_samples(
    game: "GameDef",
    x: JointParams,
    sigma: float,
    scheme: str,
    z: np.ndarray,
    game_seeds: np.ndarray,
    baseline_seed: int | None = None,
) -> np.ndarray:
    """Per-sample joint-perturbation rows (batch, total_dim).

    One joint draw z perturbs every player's block at once; player i's
    component of the utility weights only its own slice of z.
    """
    xflat = x.concat()
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] != xflat.size:
        raise ValueError(f"z must be (batch, {xflat.size}), got {z.shape}")

    up = game.utility_batch(xflat[None, :] + sigma * z, game_seeds)
    if scheme == "cd":
        um = game.utility_batch(xflat[None, :] - sigma * z, game_seeds)
        coef = (up - um) / (2.0 * sigma)
    elif scheme == "fd":
        base = game.utility(x, int(baseline_seed))
        coef = (up - base[None, :]) / sigma
    elif scheme == "sp":
        coef = up / sigma
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return np.repeat(coef, x.dims, axis=1) * z


def spg_samples(
    game: "GameDef",
    x: JointParams,
    sigma: float,
    scheme: str,
    z: np.ndarray,
    game_seeds: np.ndarray,
    baseline_seed: int | None = None,
) -> np.ndarray:
    """Per-sample per-player-perturbation rows (batch, total_dim).

    Player i's block is estimated from evaluations where only that block is
    perturbed; all players inside one sample share the sample's game seed.
    """
    xflat = x.concat()
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] != xflat.size:
        raise ValueError(f"z must be (batch, {xflat.size}), got {z.shape}")

    rows = np.empty_like(z)
    base = game.utility(x, int(baseline_seed)) if scheme == "fd" else None
    for i, sl in enumerate(_block_slices(x.dims)):
        xp = np.tile(xflat, (z.shape[0], 1))
        xp[:, sl] += sigma * z[:, sl]
        up = game.utility_batch(xp, game_seeds)[:, i]
        if scheme == "cd":
            xm = np.tile(xflat, (z.shape[0], 1))
            xm[:, sl] -= sigma * z[:, sl]
            um = game.utility_batch(xm, game_seeds)[:, i]
            coef = (up - um) / (2.0 * sigma)
        elif scheme == "fd":
            coef = (up - base[i]) / sigma
        elif scheme == "sp":
            coef = up / sigma
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
        rows[:, sl] = coef[:, None] * z[:, sl]
    return rows


# --- public estimators -------------------------------------------------------


def _finish(x: JointParams, rows: np.ndarray, evals: int) -> GradientEstimate:
    g = rows.mean(axis=0)
    blocks = tuple(g[sl].copy() for sl in _block_slices(x.dims))
    return GradientEstimate(blocks=blocks, utility_evals=evals)


def pseudo_gradient_scalar(
    f: Callable[[np.ndarray, int], float],
    x: np.ndarray,
    cfg: SmoothingConfig,
    seed: int,
    f_batch: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
) -> GradientEstimate:
    """Pseudo-gradient of a scalar black box f(x, game_seed).

    Returns a single-block estimate. `f_batch(rows, seeds)`, when supplied,
    evaluates many points at once and must agree with f row by row.
    """
    x = np.asarray(x, dtype=np.float64)
    z, game_seeds, baseline_seed = _draw(cfg, x.size, seed)
    rows = scalar_samples(f, x, cfg.sigma, cfg.scheme, z, game_seeds, baseline_seed, f_batch)
    return GradientEstimate(
        blocks=(rows.mean(axis=0),),
        utility_evals=eval_count(cfg.scheme, cfg.batch_size),
    )


def jpspg_estimate(game: "GameDef", x: JointParams, cfg: SmoothingConfig, seed: int) -> GradientEstimate:
    """Joint-perturbation simultaneous pseudo-gradient (evals independent of n)."""
    z, game_seeds, baseline_seed = _draw(cfg, x.size, seed)
    rows = jpspg_samples(game, x, cfg.sigma, cfg.scheme, z, game_seeds, baseline_seed)
    return _finish(x, rows, eval_count(cfg.scheme, cfg.batch_size))


def spg_estimate(game: "GameDef", x: JointParams, cfg: SmoothingConfig, seed: int) -> GradientEstimate:
    """Per-player simultaneous pseudo-gradient (evals linear in n)."""
    z, game_seeds, baseline_seed = _draw(cfg, x.size, seed)
    rows = spg_samples(game, x, cfg.sigma, cfg.scheme, z, game_seeds, baseline_seed)
    return _finish(x, rows, eval_count(cfg.scheme, cfg.batch_size, game.n_players))
