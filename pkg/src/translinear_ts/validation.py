"""Input validation helpers shared by the functional API and the estimators."""

import numbers

import numpy as np

from .exceptions import ArgumentError, DomainError


def check_series_array(x, *, name="X", min_length=1, nonnegative=False):
    """Coerce ``x`` to a finite 1-D float64 array.

    Accepts a :class:`~translinear_ts.series.Series`, a 1-D array, or a
    single-column 2-D array (the shape scikit-learn passes to transformers).
    """
    values = getattr(x, "values", x)
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ArgumentError(f"{name} must be a 1-D series or a single column, got shape {arr.shape}")
    if arr.size < min_length:
        raise ArgumentError(f"{name} needs at least {min_length} observations, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains NaN or infinite values")
    if nonnegative and np.any(arr < 0):
        raise DomainError(f"{name} must be nonnegative")
    return arr


def check_count(n, name, minimum=1):
    if isinstance(n, bool) or not isinstance(n, numbers.Integral):
        raise ArgumentError(f"{name} must be an integer, got {n!r}")
    if n < minimum:
        raise ArgumentError(f"{name} must be >= {minimum}, got {n}")
    return int(n)


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ArgumentError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_probability(q, name, low=0.0, high=1.0, *, closed_low=False):
    if not isinstance(q, numbers.Real) or not np.isfinite(q):
        raise ArgumentError(f"{name} must be a finite number, got {q!r}")
    ok_low = q >= low if closed_low else q > low
    if not (ok_low and q < high):
        bracket = "[" if closed_low else "("
        raise ArgumentError(f"{name} must lie in {bracket}{low}, {high}), got {q}")
    return float(q)


def as_generator(seed):
    """Return a PCG64-backed :class:`numpy.random.Generator` for ``seed``.

    PCG64 is numpy's documented default bit generator; its streams are
    identical across platforms for the same integer seed.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral):
        raise ArgumentError(f"seed must be an integer, got {seed!r}")
    return np.random.Generator(np.random.PCG64(int(seed)))
