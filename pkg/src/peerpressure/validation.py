"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""
from __future__ import annotations

import numpy as np

from .exceptions import DimensionMismatch, OutOfRangeOpinion


def check_vector(x, n: int | None = None, name: str = "x") -> np.ndarray:
    """Return ``x`` as a finite 1-D float array, optionally of length ``n``."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-D, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise DimensionMismatch(f"{name} has length {arr.shape[0]}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_opinions(x, n: int | None = None, name: str = "x") -> np.ndarray:
    """Like :func:`check_vector` but also require every entry in [0, 1]."""
    arr = check_vector(x, n, name)
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        raise OutOfRangeOpinion(f"{name} has entries outside [0, 1]")
    return arr


def check_square(M, name: str = "M") -> np.ndarray:
    arr = np.asarray(M, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_symmetric(M, name: str = "M", rtol: float = 1e-12) -> np.ndarray:
    """Validate near-symmetry and return the exactly symmetrized matrix."""
    arr = check_square(M, name)
    scale = max(1.0, float(np.abs(arr).max(initial=0.0)))
    if np.abs(arr - arr.T).max(initial=0.0) > rtol * scale:
        raise ValueError(f"{name} is not symmetric")
    return 0.5 * (arr + arr.T)


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be a positive finite number, got {value}")
    return value
