"""Single-hidden-layer strategy networks over flat parameter vectors.

Parameters live in one contiguous float64 vector per player so that
perturbation-based gradient estimators can treat strategies as plain
points in R^d. Layout is layer-major, weights before biases:

    [W1 (hidden x in, row-major) | b1 | W2 (out x hidden, row-major) | b2]
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

SQUASHES = ("unit_interval", "none")


@dataclass(frozen=True)
class NetSpec:
    """Shape of a one-hidden-layer ReLU network."""

    input_dim: int
    hidden_dim: int
    output_dim: int
    output_squash: str = "unit_interval"

    def __post_init__(self):
        for name in ("input_dim", "hidden_dim", "output_dim"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if self.output_squash not in SQUASHES:
            raise ValueError(f"output_squash must be one of {SQUASHES}")


def param_count(spec: NetSpec) -> int:
    """Length of the flat parameter vector for `spec`."""
    i, h, o = spec.input_dim, spec.hidden_dim, spec.output_dim
    return i * h + h + h * o + o


def init_params(spec: NetSpec, seed: int) -> np.ndarray:
    """He-initialised weights (std sqrt(2/fan_in)), zero biases.

    Deterministic given `seed`; weight draws happen in layout order (W1 then W2).
    """
    rng = np.random.default_rng(seed)
    i, h, o = spec.input_dim, spec.hidden_dim, spec.output_dim
    w1 = rng.standard_normal((h, i)) * np.sqrt(2.0 / i)
    w2 = rng.standard_normal((o, h)) * np.sqrt(2.0 / h)
    return np.concatenate([w1.ravel(), np.zeros(h), w2.ravel(), np.zeros(o)])


def _check_params(spec: NetSpec, params: np.ndarray) -> np.ndarray:
    params = np.asarray(params, dtype=np.float64)
    if params.ndim != 1 or params.size != param_count(spec):
        raise ValueError(
            f"expected {param_count(spec)} parameters for {spec}, got shape {params.shape}"
        )
    return params


def _squash(spec: NetSpec, pre: np.ndarray) -> np.ndarray:
    if spec.output_squash == "unit_interval":
        return expit(pre)
    return pre


def forward(spec: NetSpec, params: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate the network at a single input vector.

    Delegates to the stacked kernel with k=1 so that single and batched
    evaluation are bit-identical.
    """
    params = _check_params(spec, params)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (spec.input_dim,):
        raise ValueError(f"expected input of shape ({spec.input_dim},), got {x.shape}")
    return forward_stack(spec, params[None, :], x[None, :])[0]


def forward_stack(spec: NetSpec, params_mat: np.ndarray, inputs: np.ndarray) -> np.ndarray:
    """Evaluate k same-shaped networks at k inputs in one shot.

    params_mat has shape (k, param_count(spec)), inputs (k, input_dim);
    returns (k, output_dim). Row j equals forward(spec, params_mat[j], inputs[j]).
    """
    params_mat = np.asarray(params_mat, dtype=np.float64)
    inputs = np.asarray(inputs, dtype=np.float64)
    if params_mat.ndim != 2 or params_mat.shape[1] != param_count(spec):
        raise ValueError(f"params_mat must be (k, {param_count(spec)}), got {params_mat.shape}")
    if inputs.shape != (params_mat.shape[0], spec.input_dim):
        raise ValueError(
            f"inputs must be ({params_mat.shape[0]}, {spec.input_dim}), got {inputs.shape}"
        )
    i, h, o = spec.input_dim, spec.hidden_dim, spec.output_dim
    k = params_mat.shape[0]
    n1 = h * i
    w1 = params_mat[:, :n1].reshape(k, h, i)
    b1 = params_mat[:, n1 : n1 + h]
    w2 = params_mat[:, n1 + h : n1 + h + o * h].reshape(k, o, h)
    b2 = params_mat[:, n1 + h + o * h :]
    hidden = np.maximum(np.einsum("khi,ki->kh", w1, inputs) + b1, 0.0)
    return _squash(spec, np.einsum("koh,kh->ko", w2, hidden) + b2)
