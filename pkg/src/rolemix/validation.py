"""Input validation helpers shared across the package."""

import numpy as np


def as_float_array(X, name="X"):
    """Convert to a contiguous 2-D float64 array, rejecting non-finite entries."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return np.ascontiguousarray(arr)


def check_non_negative(X, name="X"):
    """Validate and return a non-negative float matrix."""
    arr = as_float_array(X, name)
    if arr.size and arr.min() < 0:
        raise ValueError(f"{name} contains negative entries")
    return arr


def check_same_shape(A, B, names=("A", "B")):
    if A.shape != B.shape:
        raise ValueError(
            f"{names[0]} and {names[1]} have mismatched shapes {A.shape} vs {B.shape}"
        )


def check_positive(value, name):
    if value <= 0:
        raise ValueError(f"{name} must be positive, got {value}")
