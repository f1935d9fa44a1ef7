"""Black-box game environments behind one vector-utility interface.

Every game is a pure map (JointParams, seed) -> utility vector: all
randomness (valuations, prize order, latent noise) is drawn from the given
seed, so repeated calls are bit-identical and centered-difference pairs can
share draws. Strategies are per-player policies; the default is a small
sigmoid-squashed network acting on the game's observation encoding, and a
``FixedPolicy`` lets tests inject analytic strategies (truthful bidding,
closed-form equilibria) without touching the mechanisms.

Mechanism layers (``*_payoffs`` / ``play_*``) are exposed separately so the
allocation and payment rules can be checked against enumeration oracles
independently of any network.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .estimators import JointParams
from .nets import NetSpec, forward, forward_stack, init_params
from .seeding import derive_seed
from .solvers import solve_assignment, solve_knapsack


# --- policies ----------------------------------------------------------------


@dataclass(frozen=True)
class NetPolicy:
    """Trainable policy: a feed-forward net over the game's observation row."""

    spec: NetSpec

    @property
    def dim(self) -> int:
        from .nets import param_count

        return param_count(self.spec)

    def init_block(self, seed: int) -> np.ndarray:
        return init_params(self.spec, seed)

    def act(self, block: np.ndarray, obs: np.ndarray) -> np.ndarray:
        return forward(self.spec, block, obs)


@dataclass(frozen=True)
class FixedPolicy:
    """Parameter-free policy computed directly from the observation row."""

    fn: Callable[[np.ndarray], np.ndarray]
    output_dim: int

    @property
    def dim(self) -> int:
        return 0

    @property
    def spec(self) -> None:
        return None

    def init_block(self, seed: int) -> np.ndarray:
        return np.zeros(0)

    def act(self, block: np.ndarray, obs: np.ndarray) -> np.ndarray:
        out = np.atleast_1d(np.asarray(self.fn(obs), dtype=np.float64))
        if out.shape != (self.output_dim,):
            raise ValueError(f"fixed policy returned shape {out.shape}, expected ({self.output_dim},)")
        return out


Policy = NetPolicy | FixedPolicy


def _uniform_net_spec(policies) -> NetSpec | None:
    specs = [p.spec for p in policies]
    if all(isinstance(p, NetPolicy) for p in policies) and len(set(specs)) == 1:
        return specs[0]
    return None


def _act_all(policies, blocks, obs: np.ndarray) -> np.ndarray:
    """Actions of a group of players given one observation row each."""
    spec = _uniform_net_spec(policies)
    if spec is not None and len(policies) > 1:
        return forward_stack(spec, np.stack(blocks), obs)
    return np.stack([p.act(b, o) for p, b, o in zip(policies, blocks, obs)])


# --- game container ----------------------------------------------------------


@dataclass(frozen=True)
class GameDef:
    """A black-box n-player game plus the plumbing the toolkit needs around it."""

    name: str
    n_players: int
    param_dims: tuple[int, ...]
    utility_fn: Callable[[JointParams, int], np.ndarray]
    utility_batch_fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    exact_v_fn: Callable[[JointParams], tuple[np.ndarray, ...]] | None = None
    init_block_fn: Callable[[int, int], np.ndarray] | None = None
    with_policy_fn: Callable[[int, Policy], "GameDef"] | None = None
    policies: tuple[Policy, ...] | None = None
    specs: tuple[NetSpec | None, ...] | None = None
    utility_bounds: tuple[float, float] | None = None
    meta: dict = field(default_factory=dict)

    @property
    def total_dim(self) -> int:
        return sum(self.param_dims)

    def utility(self, x: JointParams, seed: int) -> np.ndarray:
        """Utility vector (one entry per player); pure in (x, seed)."""
        if x.dims != self.param_dims:
            raise ValueError(f"params dims {x.dims} do not match game dims {self.param_dims}")
        u = np.asarray(self.utility_fn(x, int(seed)), dtype=np.float64)
        if u.shape != (self.n_players,):
            raise ValueError(f"game returned utility shape {u.shape}")
        return u

    def utility_batch(self, rows: np.ndarray, seeds) -> np.ndarray:
        """Utilities for many flat profiles at once; row b uses seeds[b].

        Equivalent to calling `utility` row by row (vectorised games override).
        """
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] != self.total_dim:
            raise ValueError(f"rows must be (batch, {self.total_dim}), got {rows.shape}")
        if self.utility_batch_fn is not None:
            return np.asarray(self.utility_batch_fn(rows, np.asarray(seeds)), dtype=np.float64)
        return np.stack(
            [
                self.utility(JointParams.from_concat(r, self.param_dims), int(s))
                for r, s in zip(rows, np.asarray(seeds))
            ]
        )

    def exact_v(self, x: JointParams) -> tuple[np.ndarray, ...]:
        """Analytic simultaneous gradient (calibration games only)."""
        if self.exact_v_fn is None:
            raise NotImplementedError(f"{self.name} has no analytic gradient")
        return self.exact_v_fn(x)

    def init_block(self, player: int, seed: int) -> np.ndarray:
        if self.init_block_fn is not None:
            return self.init_block_fn(player, seed)
        if self.policies is not None:
            return self.policies[player].init_block(seed)
        return np.random.default_rng(seed).standard_normal(self.param_dims[player])

    def init_params(self, seed: int) -> JointParams:
        return JointParams(
            tuple(self.init_block(i, derive_seed(seed, "init", i)) for i in range(self.n_players))
        )

    def with_policy(self, player: int, policy: Policy) -> "GameDef":
        """Rebuild the game with one player's policy replaced."""
        if self.with_policy_fn is None:
            raise NotImplementedError(f"{self.name} does not support policy replacement")
        return self.with_policy_fn(player, policy)


def _policy_game(
    name: str,
    policies: tuple[Policy, ...],
    play: Callable,
    rebuild: Callable[[tuple[Policy, ...]], "GameDef"],
    utility_bounds,
    utility_batch_fn=None,
    meta=None,
) -> GameDef:
    def with_policy(player: int, policy: Policy) -> GameDef:
        new = list(policies)
        new[player] = policy
        return rebuild(tuple(new))

    return GameDef(
        name=name,
        n_players=len(policies),
        param_dims=tuple(p.dim for p in policies),
        utility_fn=play,
        utility_batch_fn=utility_batch_fn,
        with_policy_fn=with_policy,
        policies=policies,
        specs=tuple(p.spec for p in policies),
        utility_bounds=utility_bounds,
        meta=meta or {},
    )


def _batch_values(seeds, draw: Callable[[np.random.Generator], np.ndarray]) -> np.ndarray:
    return np.stack([draw(np.random.default_rng(int(s))) for s in seeds])


# --- unit-demand multi-item auction -------------------------------------------


def unit_demand_payoffs(values: np.ndarray, bids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First-price payoffs for unit-demand bidders under the optimal assignment.

    Returns (utilities, assignment). Winner of item j at bid b pays b and
    values it at v: utility contribution v - b.
    """
    values = np.asarray(values, dtype=np.float64)
    bids = np.asarray(bids, dtype=np.float64)
    assignment, _ = solve_assignment(bids)
    return ((values - bids) * assignment).sum(axis=1), assignment


def unit_demand_auction(
    n_players: int, n_items: int, hidden_dim: int = 64, policies: tuple[Policy, ...] | None = None
) -> GameDef:
    """Sealed-bid first-price auction for m items, one item per bidder at most.

    Valuations v_ij ~ U[0,1] iid; each bidder observes its own valuation row
    and submits a bid per item; the allocation maximises total bids.
    """
    if n_players < 1 or n_items < 1:
        raise ValueError("need at least one player and one item")
    if policies is None:
        policies = tuple(
            NetPolicy(NetSpec(n_items, hidden_dim, n_items)) for _ in range(n_players)
        )
    if len(policies) != n_players:
        raise ValueError("one policy per player")

    def play(x: JointParams, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        values = rng.random((n_players, n_items))
        bids = _act_all(policies, x.blocks, values)
        return unit_demand_payoffs(values, bids)[0]

    spec = _uniform_net_spec(policies)
    batch_fn = None
    if spec is not None:
        d = policies[0].dim

        def batch_fn(rows: np.ndarray, seeds) -> np.ndarray:
            B = rows.shape[0]
            values = _batch_values(seeds, lambda r: r.random((n_players, n_items)))
            bids = forward_stack(
                spec,
                rows.reshape(B * n_players, d),
                values.reshape(B * n_players, n_items),
            ).reshape(B, n_players, n_items)
            out = np.empty((B, n_players))
            for b in range(B):
                assignment, _ = solve_assignment(bids[b])
                out[b] = ((values[b] - bids[b]) * assignment).sum(axis=1)
            return out

    return _policy_game(
        "unit_demand",
        policies,
        play,
        lambda pols: unit_demand_auction(n_players, n_items, hidden_dim, pols),
        utility_bounds=(-1.0, 1.0),
        utility_batch_fn=batch_fn,
        meta={"n_items": n_items, "hidden_dim": hidden_dim},
    )


# --- single-item knapsack procurement-style auction ---------------------------


def knapsack_payoffs(
    values: np.ndarray, sizes: np.ndarray, capacity: float, bids: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """First-price payoffs when winners are chosen by an exact knapsack solve.

    Returns (utilities, selection): selection maximises the sum of accepted
    bids subject to the size budget; accepted bidder i gets v_i - b_i.
    """
    selection, _ = solve_knapsack(bids, sizes, capacity)
    return (np.asarray(values, dtype=np.float64) - np.asarray(bids, dtype=np.float64)) * selection, selection


def knapsack_auction(
    n_players: int, hidden_dim: int = 64, policies: tuple[Policy, ...] | None = None
) -> GameDef:
    """Knapsack-constrained sealed-bid auction.

    Per seed: v_i, c_i ~ U[0,1] iid and capacity C ~ U[0, n]. Bidder i
    observes [v_i, c_i, C] and bids in [0,1]; the seller accepts the
    bid-value-maximising feasible set.
    """
    if n_players < 1:
        raise ValueError("need at least one player")
    if policies is None:
        policies = tuple(NetPolicy(NetSpec(3, hidden_dim, 1)) for _ in range(n_players))
    if len(policies) != n_players:
        raise ValueError("one policy per player")

    def _draws(rng: np.random.Generator):
        values = rng.random(n_players)
        sizes = rng.random(n_players)
        capacity = rng.uniform(0.0, n_players)
        return values, sizes, capacity

    def _obs(values, sizes, capacity):
        return np.column_stack([values, sizes, np.full(n_players, capacity)])

    def play(x: JointParams, seed: int) -> np.ndarray:
        values, sizes, capacity = _draws(np.random.default_rng(seed))
        bids = _act_all(policies, x.blocks, _obs(values, sizes, capacity)).ravel()
        return knapsack_payoffs(values, sizes, capacity, bids)[0]

    spec = _uniform_net_spec(policies)
    batch_fn = None
    if spec is not None:
        d = policies[0].dim

        def batch_fn(rows: np.ndarray, seeds) -> np.ndarray:
            B = rows.shape[0]
            draws = [_draws(np.random.default_rng(int(s))) for s in seeds]
            obs = np.stack([_obs(*dr) for dr in draws])
            bids = forward_stack(
                spec, rows.reshape(B * n_players, d), obs.reshape(B * n_players, 3)
            ).reshape(B, n_players)
            out = np.empty((B, n_players))
            for b, (values, sizes, capacity) in enumerate(draws):
                out[b] = knapsack_payoffs(values, sizes, capacity, bids[b])[0]
            return out

    return _policy_game(
        "knapsack",
        policies,
        play,
        lambda pols: knapsack_auction(n_players, hidden_dim, pols),
        utility_bounds=(-1.0, 1.0),
        utility_batch_fn=batch_fn,
        meta={"hidden_dim": hidden_dim},
    )


# --- sequential sealed-bid auction -------------------------------------------


@dataclass(frozen=True)
class SequentialTrace:
    values: np.ndarray
    prices: np.ndarray
    winners: np.ndarray
    utilities: np.ndarray


def play_sequential(
    policies, blocks, n_rounds: int, seed: int
) -> SequentialTrace:
    """K first-price rounds of one item each; a winner leaves the auction.

    Observation per active bidder and round k: [v_i, k/K, p_1..p_{K-1}]
    with unseen prices zero-padded. Ties go to the lowest player index.
    """
    n = len(policies)
    rng = np.random.default_rng(seed)
    values = rng.random(n)
    active = np.ones(n, dtype=bool)
    utilities = np.zeros(n)
    prices: list[float] = []
    winners: list[int] = []
    for k in range(1, n_rounds + 1):
        price_hist = np.zeros(n_rounds - 1)
        price_hist[: len(prices)] = prices
        idx = np.flatnonzero(active)
        obs = np.column_stack(
            [values[idx], np.full(idx.size, k / n_rounds), np.tile(price_hist, (idx.size, 1))]
        )
        bids = _act_all(
            [policies[i] for i in idx], [blocks[i] for i in idx], obs
        ).ravel()
        w = int(idx[np.argmax(bids)])
        price = float(bids[np.argmax(bids)])
        utilities[w] = values[w] - price
        active[w] = False
        prices.append(price)
        winners.append(w)
    return SequentialTrace(values, np.array(prices), np.array(winners), utilities)


def sequential_auction(
    n_players: int, n_rounds: int, hidden_dim: int = 64, policies: tuple[Policy, ...] | None = None
) -> GameDef:
    """Sequential first-price auction: K identical items sold one per round."""
    if not (n_players > n_rounds >= 1):
        raise ValueError(f"need n_players > n_rounds >= 1, got {n_players}, {n_rounds}")
    if policies is None:
        policies = tuple(
            NetPolicy(NetSpec(n_rounds + 1, hidden_dim, 1)) for _ in range(n_players)
        )
    if len(policies) != n_players:
        raise ValueError("one policy per player")

    def play(x: JointParams, seed: int) -> np.ndarray:
        return play_sequential(policies, x.blocks, n_rounds, seed).utilities

    return _policy_game(
        "sequential",
        policies,
        play,
        lambda pols: sequential_auction(n_players, n_rounds, hidden_dim, pols),
        utility_bounds=(-1.0, 1.0),
        meta={"n_rounds": n_rounds, "hidden_dim": hidden_dim},
    )


# --- all-pay bidding game over a random prize sequence ------------------------


@dataclass(frozen=True)
class GoofspielTrace:
    prizes: np.ndarray
    budget_history: np.ndarray
    scores: np.ndarray


def play_goofspiel(policies, blocks, n_rounds: int, seed: int) -> GoofspielTrace:
    """R rounds of all-pay bidding for prizes 1/R..1 in random order.

    Everyone pays their own bid each round; the highest bid takes the prize,
    exact ties split it equally. Bids are a learned fraction of the
    remaining budget, so budgets stay non-negative by construction.
    Observation: [budget_i, prize_k, k/R, xi] with xi ~ N(0,1) fresh per
    player and round (latent noise enabling mixed play).
    """
    n = len(policies)
    rng = np.random.default_rng(seed)
    prize_units = rng.permutation(np.arange(1, n_rounds + 1)).astype(np.float64)
    prizes = prize_units / n_rounds
    budgets = np.ones(n)
    # Scores accumulate in whole prize units (1..R, halves etc. on ties) and
    # are divided by R once at the end: a sweep of every prize then sums small
    # integers exactly, so the total can never drift past (R+1)/2 in floats.
    score_units = np.zeros(n)
    history = [budgets.copy()]
    for k in range(1, n_rounds + 1):
        noise = rng.standard_normal(n)
        obs = np.column_stack(
            [budgets, np.full(n, prizes[k - 1]), np.full(n, k / n_rounds), noise]
        )
        fractions = _act_all(policies, blocks, obs).ravel()
        bids = fractions * budgets
        top = bids.max()
        winners = bids == top
        score_units[winners] += prize_units[k - 1] / winners.sum()
        budgets = budgets - bids
        history.append(budgets.copy())
    return GoofspielTrace(prizes, np.stack(history), score_units / n_rounds)


def goofspiel(
    n_players: int, n_rounds: int = 13, hidden_dim: int = 64, policies: tuple[Policy, ...] | None = None
) -> GameDef:
    """Continuous-bid Goofspiel with all-pay rounds and budget 1 per player."""
    if n_players < 1 or n_rounds < 1:
        raise ValueError("need at least one player and one round")
    if policies is None:
        policies = tuple(NetPolicy(NetSpec(4, hidden_dim, 1)) for _ in range(n_players))
    if len(policies) != n_players:
        raise ValueError("one policy per player")

    def play(x: JointParams, seed: int) -> np.ndarray:
        return play_goofspiel(policies, x.blocks, n_rounds, seed).scores

    return _policy_game(
        "goofspiel",
        policies,
        play,
        lambda pols: goofspiel(n_players, n_rounds, hidden_dim, pols),
        utility_bounds=(0.0, (n_rounds + 1) / 2.0),
        meta={"n_rounds": n_rounds, "hidden_dim": hidden_dim},
    )


# --- calibration games with analytic gradients --------------------------------


def quadratic_game(n_players: int, dim: int = 1, coeff_seed: int = 0) -> GameDef:
    """Smooth calibration game with a closed-form simultaneous gradient.

    u_i(x) = -||x_i - c_i||^2 + sum_{j != i} a_ij <x_i, x_j>, with fixed
    seeded coefficients c_i ~ U(-1,1)^dim and a_ij ~ U(-0.5, 0.5). The game
    ignores the seed argument (no environment randomness).
    """
    if n_players < 1 or dim < 1:
        raise ValueError("need at least one player and one dimension")
    from .seeding import make_rng

    crng = make_rng(coeff_seed, "quadratic-coeffs")
    centers = crng.uniform(-1.0, 1.0, size=(n_players, dim))
    coupling = crng.uniform(-0.5, 0.5, size=(n_players, n_players))
    np.fill_diagonal(coupling, 0.0)
    dims = (dim,) * n_players

    def batch_fn(rows: np.ndarray, seeds) -> np.ndarray:
        pts = rows.reshape(rows.shape[0], n_players, dim)
        cross = np.einsum("ij,bjd->bid", coupling, pts)
        return -np.square(pts - centers).sum(axis=2) + (pts * cross).sum(axis=2)

    def play(x: JointParams, seed: int) -> np.ndarray:
        return batch_fn(x.concat()[None, :], [seed])[0]

    def exact_v(x: JointParams) -> tuple[np.ndarray, ...]:
        pts = np.stack(x.blocks)
        cross = coupling @ pts
        v = -2.0 * (pts - centers) + cross
        return tuple(v[i] for i in range(n_players))

    return GameDef(
        name="quadratic",
        n_players=n_players,
        param_dims=dims,
        utility_fn=play,
        utility_batch_fn=batch_fn,
        exact_v_fn=exact_v,
        meta={"dim": dim, "coeff_seed": coeff_seed, "centers": centers, "coupling": coupling},
    )


def bilinear_game() -> GameDef:
    """Two-player rotation benchmark: u = (x1*x2, -x1*x2), exact_v = (x2, -x1)."""

    def batch_fn(rows: np.ndarray, seeds) -> np.ndarray:
        prod = rows[:, 0] * rows[:, 1]
        return np.column_stack([prod, -prod])

    def play(x: JointParams, seed: int) -> np.ndarray:
        return batch_fn(x.concat()[None, :], [seed])[0]

    def exact_v(x: JointParams) -> tuple[np.ndarray, ...]:
        return (x.blocks[1].copy(), -x.blocks[0].copy())

    return GameDef(
        name="bilinear",
        n_players=2,
        param_dims=(1, 1),
        utility_fn=play,
        utility_batch_fn=batch_fn,
        exact_v_fn=exact_v,
    )


# --- symmetric first-price auction with a known equilibrium -------------------


def first_price_payoffs(values: np.ndarray, bids: np.ndarray) -> np.ndarray:
    """Single-item first-price payoffs; ties go to the lowest player index."""
    values = np.asarray(values, dtype=np.float64)
    bids = np.asarray(bids, dtype=np.float64)
    utilities = np.zeros(values.shape)
    w = int(np.argmax(bids))
    utilities[w] = values[w] - bids[w]
    return utilities


def symmetric_equilibrium_bid(values: np.ndarray, n_players: int) -> np.ndarray:
    """Closed-form symmetric equilibrium bid (n-1)/n * v for iid U[0,1] values."""
    return (n_players - 1) / n_players * np.asarray(values, dtype=np.float64)


def first_price_calibration(
    n_players: int, hidden_dim: int = 64, policies: tuple[Policy, ...] | None = None
) -> GameDef:
    """Single-item first-price auction with iid U[0,1] values.

    The symmetric equilibrium bid function is (n-1)/n * v, which makes this
    a convergence oracle for the training loop.
    """
    if n_players < 2:
        raise ValueError("need at least two players")
    if policies is None:
        policies = tuple(NetPolicy(NetSpec(1, hidden_dim, 1)) for _ in range(n_players))
    if len(policies) != n_players:
        raise ValueError("one policy per player")

    def play(x: JointParams, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        values = rng.random(n_players)
        bids = _act_all(policies, x.blocks, values[:, None]).ravel()
        return first_price_payoffs(values, bids)

    spec = _uniform_net_spec(policies)
    batch_fn = None
    if spec is not None:
        d = policies[0].dim

        def batch_fn(rows: np.ndarray, seeds) -> np.ndarray:
            B = rows.shape[0]
            values = _batch_values(seeds, lambda r: r.random(n_players))
            bids = forward_stack(
                spec, rows.reshape(B * n_players, d), values.reshape(B * n_players, 1)
            ).reshape(B, n_players)
            w = np.argmax(bids, axis=1)
            out = np.zeros((B, n_players))
            rows_idx = np.arange(B)
            out[rows_idx, w] = values[rows_idx, w] - bids[rows_idx, w]
            return out

    return _policy_game(
        "first_price",
        policies,
        play,
        lambda pols: first_price_calibration(n_players, hidden_dim, pols),
        utility_bounds=(-1.0, 1.0),
        utility_batch_fn=batch_fn,
        meta={"hidden_dim": hidden_dim},
    )
