"""Input validation helpers.

Small, estimator-friendly checks used throughout the package. All of them
either return a validated ``numpy`` array or raise :class:`DataError` /
:class:`NumericalError` with a message naming the offending input.
"""

from __future__ import annotations

import numpy as np

from .errors import DataError, NumericalError

#: Fixed emotion order used everywhere a five-way profile appears.
EMOTIONS = ("anger", "fear", "joy", "sadness", "surprise")

SIMPLEX_ATOL = 1e-9


def as_float_array(values, name: str = "array") -> np.ndarray:
    """Coerce to a float64 array, rejecting non-numeric input."""
    try:
        arr = np.asarray(values, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise DataError(f"{name}: not numeric ({exc})") from exc
    return arr


def check_finite(arr: np.ndarray, name: str = "array") -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"{name}: contains NaN or Inf")
    return arr


def check_profile(values, name: str = "profile") -> np.ndarray:
    """Validate a point on the 5-simplex over the fixed emotion order.

    Components must lie in [0, 1] and sum to 1 within ``SIMPLEX_ATOL``.
    """
    arr = as_float_array(values, name)
    if arr.shape != (len(EMOTIONS),):
        raise DataError(f"{name}: expected {len(EMOTIONS)} components, got shape {arr.shape}")
    check_finite(arr, name)
    if np.any(arr < -SIMPLEX_ATOL) or np.any(arr > 1.0 + SIMPLEX_ATOL):
        raise DataError(f"{name}: components must lie in [0, 1], got {arr.tolist()}")
    total = float(arr.sum())
    if abs(total - 1.0) > SIMPLEX_ATOL:
        raise DataError(f"{name}: components sum to {total!r}, expected 1")
    return arr


def check_profile_matrix(values, name: str = "profiles") -> np.ndarray:
    """Validate an (n, 5) matrix whose rows are simplex profiles."""
    arr = as_float_array(values, name)
    if arr.ndim != 2 or arr.shape[1] != len(EMOTIONS):
        raise DataError(f"{name}: expected shape (n, {len(EMOTIONS)}), got {arr.shape}")
    for i, row in enumerate(arr):
        check_profile(row, f"{name}[{i}]")
    return arr


def check_vector(values, dim: int | None = None, name: str = "vector") -> np.ndarray:
    arr = as_float_array(values, name)
    if arr.ndim != 1:
        raise DataError(f"{name}: expected 1-d vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DataError(f"{name}: expected length {dim}, got {arr.shape[0]}")
    return check_finite(arr, name)


def check_matrix(values, cols: int | None = None, name: str = "matrix") -> np.ndarray:
    arr = as_float_array(values, name)
    if arr.ndim != 2:
        raise DataError(f"{name}: expected 2-d matrix, got shape {arr.shape}")
    if cols is not None and arr.shape[1] != cols:
        raise DataError(f"{name}: expected {cols} columns, got {arr.shape[1]}")
    return check_finite(arr, name)


def check_aligned(a, b, name_a: str = "a", name_b: str = "b") -> None:
    """Require two per-token sequences to have equal length."""
    if len(a) != len(b):
        raise DataError(f"{name_a} and {name_b} are not token-aligned ({len(a)} vs {len(b)})")


def check_seed(seed) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool) or seed < 0:
        raise DataError(f"seed must be a non-negative integer, got {seed!r}")
    return int(seed)
