"""Input validation helpers used by every estimator and loss."""

import numpy as np

from .errors import ShapeError, ValidationError


def as_matrix(x, name: str = "X") -> np.ndarray:
    """Coerce to a 2-D float64 array, rejecting non-finite entries."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def check_width(x: np.ndarray, width: int, name: str = "X") -> np.ndarray:
    if x.shape[1] != width:
        raise ShapeError(f"{name} has {x.shape[1]} columns, expected {width}")
    return x


def as_binary_targets(y, n: int | None = None, name: str = "y") -> np.ndarray:
    """Coerce targets to a flat int array of 0/1 values."""
    arr = np.asarray(y)
    arr = arr.reshape(-1)
    if arr.size == 0:
        raise ValidationError(f"{name} is empty")
    vals = np.unique(arr)
    if not np.all(np.isin(vals, (0, 1))):
        raise ValidationError(f"{name} must contain only 0/1 values, got {vals[:8]}")
    if n is not None and arr.shape[0] != n:
        raise ShapeError(f"{name} has {arr.shape[0]} entries, expected {n}")
    return arr.astype(np.int64)


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "arrays") -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{what} have mismatched shapes {a.shape} vs {b.shape}")
