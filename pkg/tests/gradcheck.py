"""Central finite-difference oracle for gradient checks.

Kept independent of the analytic backward passes it verifies: the oracle
only ever calls a loss function of a flat parameter vector.
"""

from __future__ import annotations

import numpy as np

from emoread.params import flatten_params, unflatten_params


def numerical_gradient(loss_fn, flat: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    """Central differences (f(x+eps) - f(x-eps)) / (2 eps), per coordinate."""
    flat = np.asarray(flat, dtype=np.float64)
    grad = np.zeros_like(flat)
    for i in range(flat.size):
        bumped = flat.copy()
        bumped[i] = flat[i] + eps
        up = loss_fn(bumped)
        bumped[i] = flat[i] - eps
        down = loss_fn(bumped)
        grad[i] = (up - down) / (2.0 * eps)
    return grad


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray,
                       floor: float = 1e-6) -> float:
    """Per-coordinate |a - n| / max(|a|, |n|, floor), maximized."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


def check_param_gradients(loss_and_grads, params: dict[str, np.ndarray],
                          eps: float = 1e-5) -> float:
    """Max relative error between analytic grads and the FD oracle.

    ``loss_and_grads(params) -> (loss, grads_dict)`` computes the analytic
    side; the numeric side re-evaluates the loss at perturbed parameters.
    """
    _, grads = loss_and_grads(params)
    analytic = flatten_params({k: grads[k] for k in params})

    def loss_of_flat(flat):
        candidate = unflatten_params(flat, params)
        loss, _ = loss_and_grads(candidate)
        return loss

    numeric = numerical_gradient(loss_of_flat, flatten_params(params), eps=eps)
    return max_relative_error(analytic, numeric)
