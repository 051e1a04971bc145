"""Input checks shared by the estimators and the CLI."""
from __future__ import annotations

import math
import numbers

import numpy as np

from .classes import CountingSequence, Domain, sequence_from_coeffs


def check_sequence(X, domain=None, name: str = "custom") -> CountingSequence:
    """Accept a CountingSequence or a 1-D array-like of ``c_1..c_K``."""
    if isinstance(X, CountingSequence):
        if domain is not None and X.domain is not Domain.parse(domain):
            raise ValueError(f"expected a {Domain.parse(domain).value} sequence")
        return X
    if isinstance(X, (str, bytes)) or not hasattr(X, "__len__"):
        raise TypeError("expected a CountingSequence or a 1-D sequence of coefficients")
    values = list(X)
    if values and isinstance(values[0], (list, tuple, np.ndarray)):
        raise ValueError("coefficients must be one-dimensional")
    if any(isinstance(v, float) and not math.isfinite(v) for v in values):
        raise ValueError("coefficients must be finite")
    return sequence_from_coeffs(values, name=name, domain=domain)


def check_rho(rho) -> float:
    if not isinstance(rho, numbers.Real) or isinstance(rho, bool):
        raise TypeError("rho must be a real number")
    rho = float(rho)
    if not 0 < rho < 1:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    return rho


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}")
    return int(value)


def check_pairs(X) -> np.ndarray:
    """``(n, N)`` query pairs as an ``(k, 2)`` integer array."""
    arr = np.asarray(X)
    if arr.ndim == 1 and arr.size == 2:
        arr = arr.reshape(1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected an array of (n, N) pairs with shape (k, 2)")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValueError("(n, N) pairs must be integers")
        arr = arr.astype(np.int64)
    if np.any(arr < 0):
        raise ValueError("(n, N) pairs must be non-negative")
    return arr.astype(np.int64)
