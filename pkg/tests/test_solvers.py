"""Combinatorial solvers checked against brute-force enumeration oracles.

The oracles here enumerate every feasible solution directly; they share no
code with the solvers under test.
"""

import itertools

import numpy as np
import pytest

from zeroeq.solvers import solve_assignment, solve_knapsack


# --- oracles -------------------------------------------------------------------

def brute_force_assignment(bids: np.ndarray) -> float:
    """Best total over all partial matchings, by explicit enumeration."""
    n, m = bids.shape
    best = 0.0
    rows = list(range(n))
    for k in range(0, min(n, m) + 1):
        for row_subset in itertools.combinations(rows, k):
            for col_perm in itertools.permutations(range(m), k):
                total = sum(bids[r, c] for r, c in zip(row_subset, col_perm))
                best = max(best, total)
    return best


def brute_force_knapsack(bids: np.ndarray, sizes: np.ndarray, capacity: float) -> float:
    """Best feasible subset total via 2^n enumeration (vectorized over masks)."""
    n = len(bids)
    masks = np.arange(2**n, dtype=np.uint32)
    member = (masks[:, None] >> np.arange(n)) & 1  # (2^n, n)
    feasible = member @ sizes <= capacity
    totals = member @ bids
    return float(totals[feasible].max())


# --- assignment ----------------------------------------------------------------

def test_assignment_two_by_two_example():
    sol, value = solve_assignment(np.array([[0.9, 0.1], [0.2, 0.8]]))
    assert value == pytest.approx(1.7)
    np.testing.assert_array_equal(sol, np.eye(2, dtype=bool))


def test_assignment_negative_bid_unmatched():
    sol, value = solve_assignment(np.array([[-1.0]]))
    assert value == 0.0
    assert not sol.any()


def test_assignment_prefers_leaving_rows_out():
    # Forcing both rows in would cost: pairing the second row anywhere is negative.
    bids = np.array([[5.0, 4.0], [-2.0, -3.0]])
    sol, value = solve_assignment(bids)
    assert value == pytest.approx(5.0)
    assert sol[0, 0] and sol.sum() == 1


def test_assignment_rectangular():
    bids = np.array([[1.0, 9.0, 2.0]])
    sol, value = solve_assignment(bids)
    assert value == pytest.approx(9.0)
    assert sol[0, 1]


def test_assignment_valid_matching_structure():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n, m = rng.integers(1, 6, size=2)
        bids = rng.uniform(-1, 1, size=(n, m))
        sol, value = solve_assignment(bids)
        assert sol.sum(axis=0).max(initial=0) <= 1
        assert sol.sum(axis=1).max(initial=0) <= 1
        assert value == pytest.approx(bids[sol].sum() if sol.any() else 0.0)


def test_assignment_against_enumeration():
    rng = np.random.default_rng(1234)
    for _ in range(1000):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, 6))
        bids = rng.uniform(-1, 1, size=(n, m))
        _, value = solve_assignment(bids)
        assert value == pytest.approx(brute_force_assignment(bids), abs=1e-9)


def test_assignment_rejects_bad_input():
    with pytest.raises(ValueError):
        solve_assignment(np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        solve_assignment(np.array([[np.inf]]))


# --- knapsack ------------------------------------------------------------------

def test_knapsack_worked_example():
    pick, value = solve_knapsack(
        np.array([0.5, 0.4, 0.3]), np.array([0.6, 0.5, 0.4]), 1.0
    )
    np.testing.assert_array_equal(pick, [True, False, True])
    assert value == pytest.approx(0.8)


def test_knapsack_nothing_fits():
    pick, value = solve_knapsack(np.array([1.0]), np.array([2.0]), 1.0)
    assert not pick.any() and value == 0.0


def test_knapsack_negative_bids_excluded():
    pick, value = solve_knapsack(
        np.array([-0.5, 0.7, 0.0]), np.array([0.1, 0.1, 0.1]), 10.0
    )
    np.testing.assert_array_equal(pick, [False, True, False])
    assert value == pytest.approx(0.7)


def test_knapsack_against_enumeration():
    rng = np.random.default_rng(99)
    for _ in range(500):
        n = int(rng.integers(1, 16))
        bids = rng.uniform(-0.2, 1.0, size=n)
        sizes = rng.uniform(0.0, 1.0, size=n)
        capacity = float(rng.uniform(0.0, n * 0.6))
        pick, value = solve_knapsack(bids, sizes, capacity)
        assert sizes[pick].sum() <= capacity + 1e-12
        oracle = brute_force_knapsack(np.maximum(bids, 0.0), sizes, capacity)
        assert value == pytest.approx(oracle, abs=1e-9)
        assert value == pytest.approx(bids[pick].sum() if pick.any() else 0.0)


def test_knapsack_scale_equivariance():
    rng = np.random.default_rng(31)
    bids = rng.uniform(0, 1, size=8)
    sizes = rng.uniform(0, 1, size=8)
    capacity = 2.0
    pick0, value0 = solve_knapsack(bids, sizes, capacity)
    for lam in (0.5, 2.0, 4.0, 3.0):
        pick, value = solve_knapsack(lam * bids, sizes, capacity)
        np.testing.assert_array_equal(pick, pick0)
        assert value == pytest.approx(lam * value0)


def test_knapsack_tie_break_lowest_indices():
    # Items 0 and 1 are identical; only one fits. Lexicographically smallest
    # indicator vector means preferring index 0.
    pick, value = solve_knapsack(np.array([0.5, 0.5]), np.array([1.0, 1.0]), 1.0)
    np.testing.assert_array_equal(pick, [True, False])
    assert value == pytest.approx(0.5)


def test_knapsack_tie_break_multiple_optima():
    # {0} and {1,2} both total 0.6 and fit; indicator (1,0,0) < (0,1,1).
    pick, _ = solve_knapsack(
        np.array([0.6, 0.3, 0.3]), np.array([1.0, 0.5, 0.5]), 1.0
    )
    np.testing.assert_array_equal(pick, [True, False, False])


def test_knapsack_deterministic():
    rng = np.random.default_rng(7)
    bids = rng.uniform(0, 1, size=12)
    sizes = rng.uniform(0, 1, size=12)
    first = solve_knapsack(bids, sizes, 3.0)
    second = solve_knapsack(bids, sizes, 3.0)
    np.testing.assert_array_equal(first[0], second[0])
    assert first[1] == second[1]


def test_knapsack_rejects_bad_input():
    with pytest.raises(ValueError):
        solve_knapsack(np.array([1.0]), np.array([1.0, 2.0]), 1.0)
    with pytest.raises(ValueError):
        solve_knapsack(np.array([1.0]), np.array([-1.0]), 1.0)
    with pytest.raises(ValueError):
        solve_knapsack(np.array([np.nan]), np.array([1.0]), 1.0)
