"""Input checks for the estimator API."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array, column_or_1d

from .exceptions import DomainError


def check_time_column(X, *, name="X", allow_zero=False):
    """Accept a 1-D array or an ``(n, 1)`` array of times; return a 1-D float array."""
    arr = check_array(X, ensure_2d=False, dtype=float, input_name=name)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise DomainError(f"{name} must have a single column of times, got shape {arr.shape}")
        arr = arr[:, 0]
    bad = arr < 0 if allow_zero else arr <= 0
    if np.any(bad):
        raise DomainError(f"{name} must be {'>= 0' if allow_zero else '> 0'}")
    return np.ascontiguousarray(arr)


def check_marker_xy(X, y):
    """Validate observation times and marker values, returning sorted-order 1-D arrays.

    Times must already be strictly increasing; the marker is a time series,
    so reordering would hide a data problem.
    """
    times = check_time_column(X)
    values = column_or_1d(check_array(y, ensure_2d=False, dtype=float, input_name="y"))
    if values.shape != times.shape:
        raise DomainError(f"X and y lengths differ: {times.size} vs {values.size}")
    if np.any(np.diff(times) <= 0):
        raise DomainError("observation times must be strictly increasing")
    return times, values
