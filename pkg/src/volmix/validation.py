"""Input validation helpers used by estimators and model functions."""

from __future__ import annotations

import numbers

import numpy as np


def check_scalar(x, name: str, *, positive: bool = False) -> float:
    """Coerce ``x`` to a finite float, optionally requiring it > 0."""
    if not isinstance(x, numbers.Real) or isinstance(x, bool):
        raise TypeError(f"{name} must be a real number, got {type(x).__name__}")
    value = float(x)
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    if positive and value <= 0.0:
        raise ValueError(f"{name} must be > 0, got {value}")
    return value


def check_in_unit_interval(x, name: str) -> float:
    value = check_scalar(x, name)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_fraction(x, name: str) -> float:
    """A strictly interior probability, 0 < x < 1."""
    value = check_scalar(x, name)
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value}")
    return value


def check_positive_int(x, name: str) -> int:
    if not isinstance(x, numbers.Integral) or isinstance(x, bool):
        raise TypeError(f"{name} must be an integer, got {type(x).__name__}")
    value = int(x)
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    return value


def as_float_array(x, name: str, *, allow_empty: bool = False) -> np.ndarray:
    """Coerce array-like input to a 1-d float64 array of finite values.

    A 2-d column vector (n, 1) is accepted and flattened, so estimators
    compose with sklearn-style callers that pass column matrices.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-d (or a single column), got shape {arr.shape}")
    if not allow_empty and arr.size == 0:
        raise ValueError(f"{name} must not be empty")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_positive_array(x, name: str) -> np.ndarray:
    arr = as_float_array(x, name)
    if np.any(arr <= 0.0):
        raise ValueError(f"{name} must be strictly positive")
    return arr
