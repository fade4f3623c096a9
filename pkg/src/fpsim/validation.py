"""Input checks for count series and day indices."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import column_or_1d


def check_counts(y, population: float | None = None, name: str = "counts") -> np.ndarray:
    """1-D finite float array of counts in ``[0, population]``."""
    arr = column_or_1d(np.asarray(y, dtype=float), warn=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if np.any(arr < 0):
        raise ValueError(f"{name} contains negative values")
    if population is not None and np.any(arr > population):
        raise ValueError(f"{name} exceeds the population size {population}")
    return arr


def check_days(X, n: int | None = None) -> np.ndarray:
    """1-D array of non-negative integer day indices."""
    arr = np.asarray(X)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    arr = column_or_1d(arr, warn=False).astype(float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0) or np.any(arr != np.round(arr)):
        raise ValueError("days must be non-negative integers")
    if n is not None and len(arr) != n:
        raise ValueError(f"expected {n} day indices, got {len(arr)}")
    return arr.astype(int)


def check_beliefs(beliefs) -> np.ndarray:
    """1-D non-empty int array of 0/1 flags."""
    arr = np.asarray(beliefs)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("beliefs must be a non-empty 1-D sequence")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("beliefs must be 0 or 1")
    return arr.astype(int)
