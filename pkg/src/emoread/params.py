"""Parameter bundles: ordered name->array dicts with flatten/unflatten views.

Every trainable subnetwork stores its parameters in a plain dict with a
stable key order. Flattening concatenates the arrays in that order, which is
what the finite-difference checks and checkpoint writer rely on.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError


def flatten_params(params: dict[str, np.ndarray]) -> np.ndarray:
    """Concatenate all parameter arrays (insertion order) into one vector."""
    if not params:
        return np.zeros(0)
    return np.concatenate([np.asarray(params[k], dtype=np.float64).ravel() for k in params])


def unflatten_params(flat: np.ndarray, template: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    """Inverse of :func:`flatten_params` against a same-shaped template."""
    flat = np.asarray(flat, dtype=np.float64)
    out: dict[str, np.ndarray] = {}
    offset = 0
    for key in template:
        shape = np.asarray(template[key]).shape
        size = int(np.prod(shape)) if shape else 1
        out[key] = flat[offset:offset + size].reshape(shape)
        offset += size
    if offset != flat.size:
        raise DataError(f"unflatten: vector length {flat.size} does not match template ({offset})")
    return out


def param_count(params: dict[str, np.ndarray]) -> int:
    return sum(int(np.asarray(v).size) for v in params.values())


def zeros_like_params(params: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {k: np.zeros_like(np.asarray(v, dtype=np.float64)) for k, v in params.items()}


def add_params(acc: dict[str, np.ndarray], other: dict[str, np.ndarray],
               scale: float = 1.0) -> None:
    """In-place ``acc += scale * other`` over matching keys."""
    for key, val in other.items():
        acc[key] += scale * val


def uniform_init(shape, fan_in: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform(-k, k) with k = 1/sqrt(fan_in)."""
    k = 1.0 / np.sqrt(max(fan_in, 1))
    return rng.uniform(-k, k, size=shape)
