"""Exact combinatorial sub-solvers used inside the game environments.

Both solvers maximise over *optional* participation: leaving a bidder /
item unassigned is always admissible and contributes zero, so entries
with non-positive value are never part of a returned solution.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment


def solve_assignment(bids: np.ndarray) -> tuple[np.ndarray, float]:
    """Maximum-value partial assignment of rows (bidders) to columns (items).

    Each row is matched to at most one column and vice versa; unmatched
    rows/columns are allowed. Negative bids are admissible input but never
    selected. Returns (solution, value) where solution is a boolean matrix
    of the same shape as `bids`.
    """
    b = np.asarray(bids, dtype=np.float64)
    if b.ndim != 2 or b.size == 0:
        raise ValueError(f"bids must be a non-empty 2-D matrix, got shape {b.shape}")
    if not np.all(np.isfinite(b)):
        raise ValueError("non-finite bid")
    # A full matching on the matrix clamped at zero attains the optimal
    # partial-matching value; dropping the non-positive pairs realises it.
    rows, cols = linear_sum_assignment(np.maximum(b, 0.0), maximize=True)
    keep = b[rows, cols] > 0.0
    solution = np.zeros(b.shape, dtype=bool)
    solution[rows[keep], cols[keep]] = True
    value = float(np.sum(b[solution]))
    return solution, value


def solve_knapsack(
    bids: np.ndarray, sizes: np.ndarray, capacity: float
) -> tuple[np.ndarray, float]:
    """Exact 0/1 knapsack over real-valued sizes by branch and bound.

    Maximises sum(bids[x]) subject to sum(sizes[x]) <= capacity. The bound
    is the fractional relaxation of the remaining suffix. Among optimal
    selections, the lexicographically smallest set of selected indices is
    returned (ties prefer including lower-indexed items); items with
    non-positive bids are never selected. Returns (selection, value) with
    selection a boolean vector.
    """
    b = np.asarray(bids, dtype=np.float64)
    c = np.asarray(sizes, dtype=np.float64)
    if b.ndim != 1 or b.shape != c.shape:
        raise ValueError(f"bids and sizes must be equal-length vectors, got {b.shape}, {c.shape}")
    if not (np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
        raise ValueError("non-finite input")
    if np.any(c < 0):
        raise ValueError("sizes must be non-negative")
    capacity = float(capacity)
    if not np.isfinite(capacity) or capacity < 0:
        raise ValueError(f"capacity must be non-negative and finite, got {capacity}")

    selection = np.zeros(b.shape, dtype=bool)
    cand = np.flatnonzero((b > 0.0) & (c <= capacity))
    if cand.size == 0:
        return selection, 0.0

    bc = b[cand]
    cc = c[cand]
    k_cand = cand.size
    # Candidate order sorted by value density, for the fractional bound only;
    # the search itself branches in index order to realise the lex tie-break.
    with np.errstate(divide="ignore"):
        density_order = np.argsort(-np.where(cc > 0, bc / np.maximum(cc, 1e-300), np.inf), kind="stable")

    def suffix_bound(start: int, room: float) -> float:
        # Fractional knapsack value over candidates with index >= start.
        total = 0.0
        for j in density_order:
            if j < start:
                continue
            if cc[j] <= room:
                total += bc[j]
                room -= cc[j]
            elif cc[j] > 0:
                total += bc[j] * (room / cc[j])
                break
        return total

    best_value = -np.inf
    best = None
    chosen = np.zeros(k_cand, dtype=bool)

    def visit(k: int, room: float, value: float) -> None:
        nonlocal best_value, best
        if value + suffix_bound(k, room) <= best_value:
            return
        if k == k_cand:
            if value > best_value:
                best_value = value
                best = chosen.copy()
            return
        # Include-first depth-first order in index order visits selections by
        # ascending index set; candidates all have positive bids, so no two
        # optima are subset-related and the first optimum found is the
        # lex-smallest one. Strict-improvement incumbents then keep it.
        if cc[k] <= room:
            chosen[k] = True
            visit(k + 1, room - cc[k], value + bc[k])
            chosen[k] = False
        visit(k + 1, room, value)

    visit(0, capacity, 0.0)
    selection[cand[best]] = True
    return selection, float(np.sum(b[selection]))
