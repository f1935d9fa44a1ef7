"""Ascent-direction optimizers.

Updates are returned as deltas and *added* by the caller (ascent
convention throughout: callers maximise their utility).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class OptimizerState:
    """AdaBelief state for one parameter block."""

    lr: float
    m: np.ndarray
    s: np.ndarray
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-16


def adabelief_init(
    dim: int,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-16,
) -> OptimizerState:
    if lr <= 0 or not np.isfinite(lr):
        raise ValueError(f"lr must be positive and finite, got {lr}")
    if not (0.0 <= beta1 < 1.0 and 0.0 <= beta2 < 1.0):
        raise ValueError("betas must lie in [0, 1)")
    return OptimizerState(
        lr=lr, m=np.zeros(dim), s=np.zeros(dim), step_count=0, beta1=beta1, beta2=beta2, eps=eps
    )


def adabelief_update(state: OptimizerState, grad: np.ndarray) -> tuple[OptimizerState, np.ndarray]:
    """One AdaBelief step; returns (new state, delta to add to the parameters).

    The second moment tracks the deviation of the gradient from its running
    mean (the "belief"), with bias correction on both moments.
    """
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.m.shape:
        raise ValueError(f"gradient shape {grad.shape} does not match state {state.m.shape}")
    if not np.all(np.isfinite(grad)):
        raise ValueError("non-finite gradient")
    b1, b2 = state.beta1, state.beta2
    t = state.step_count + 1
    m = b1 * state.m + (1.0 - b1) * grad
    s = b2 * state.s + (1.0 - b2) * np.square(grad - m) + state.eps
    m_hat = m / (1.0 - b1**t)
    s_hat = s / (1.0 - b2**t)
    delta = state.lr * m_hat / (np.sqrt(s_hat) + state.eps)
    return replace(state, m=m, s=s, step_count=t), delta


def sgd_update(lr: float, grad: np.ndarray) -> np.ndarray:
    """Plain ascent step lr * grad."""
    grad = np.asarray(grad, dtype=np.float64)
    if not np.all(np.isfinite(grad)):
        raise ValueError("non-finite gradient")
    return lr * grad
