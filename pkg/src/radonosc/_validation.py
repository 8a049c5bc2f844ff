"""Argument checks shared by the estimators and the command line."""
from __future__ import annotations

import numbers

import numpy as np


def check_samples(X, min_ndim: int = 2, name: str = "X") -> np.ndarray:
    """Finite complex array with a leading sample axis."""
    arr = np.asarray(X)
    if arr.dtype == object:
        raise TypeError(f"{name} must be numeric")
    arr = arr.astype(complex)
    if arr.ndim < min_ndim:
        raise ValueError(f"{name} must have at least {min_ndim} dimensions, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError(f"{name} has no samples")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinity")
    return arr


def check_scalar(value, name: str, kind=numbers.Real, low=None, high=None,
                 low_open: bool = False, high_open: bool = False):
    if isinstance(value, bool) or not isinstance(value, kind):
        raise TypeError(f"{name} must be {kind.__name__}, got {type(value).__name__}")
    if low is not None and (value < low or (low_open and value == low)):
        raise ValueError(f"{name}={value} is below the allowed range")
    if high is not None and (value > high or (high_open and value == high)):
        raise ValueError(f"{name}={value} is above the allowed range")
    return value


def check_fitted(est, attr: str):
    if not hasattr(est, attr):
        from sklearn.exceptions import NotFittedError
        raise NotFittedError(f"{type(est).__name__} is not fitted; call fit first")


def check_n_features(est, X: np.ndarray):
    got = X.shape[1:]
    want = getattr(est, "input_shape_", got)
    if tuple(got) != tuple(want):
        raise ValueError(f"{type(est).__name__} was fitted on samples of shape {want}, got {got}")
