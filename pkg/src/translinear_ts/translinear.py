"""Transformed-linear arithmetic on the positive reals.

Addition and scalar multiplication are conjugated by the softplus map
``tau(y) = log(1 + exp(y))``::

    x1 (+) x2 = tau(tau_inv(x1) + tau_inv(x2))
    a  (.) x  = tau(a * tau_inv(x))

The zero element of the resulting vector space is ``tau(0) = log 2``.
All functions accept scalars or numpy arrays and return the same shape.
"""

import math

import numpy as np

from .exceptions import DomainError

__all__ = [
    "ZERO",
    "tau",
    "tau_inv",
    "t_add",
    "t_scale",
    "t_combine",
    "t_sub",
]

ZERO = float(np.log(2.0))

# exp(-30) is below double epsilon, so both softplus branches agree here.
_SOFTPLUS_BRANCH = 30.0


def _as_float(x):
    arr = np.asarray(x, dtype=np.float64)
    return arr


def _out(arr):
    return float(arr) if arr.ndim == 0 else arr


def _check_finite(y, name="y"):
    if not np.all(np.isfinite(y)):
        raise DomainError(f"{name} must be finite")


def _check_positive(x, name="x"):
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name} must be finite")
    if np.any(x <= 0):
        raise DomainError(f"{name} must be strictly positive (tau_inv is undefined at 0)")


def _softplus(y):
    big = y >= _SOFTPLUS_BRANCH
    # clip keeps exp() from overflowing in the branch that is discarded
    small_val = np.log1p(np.exp(np.minimum(y, _SOFTPLUS_BRANCH)))
    big_val = y + np.log1p(np.exp(-np.maximum(y, _SOFTPLUS_BRANCH)))
    return np.where(big, big_val, small_val)


def _softplus_inv(x):
    y = x + np.log(-np.expm1(-x))
    # one Newton step on tau(y) = x; tau'(y) = 1 - exp(-x)
    return y + (x - _softplus(y)) / -np.expm1(-x)


def _scalar(*args):
    return all(isinstance(v, (float, int, np.floating, np.integer)) for v in args)


def _pos_scalar(x, name="x"):
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite")
    if x <= 0:
        raise DomainError(f"{name} must be strictly positive (tau_inv is undefined at 0)")
    return x


def _fin_scalar(y, name="y"):
    y = float(y)
    if not math.isfinite(y):
        raise DomainError(f"{name} must be finite")
    return y


# math versions of the two maps; scalar calls skip numpy's per-call overhead
def _sp(y):
    if y >= _SOFTPLUS_BRANCH:
        return y + math.log1p(math.exp(-y))
    return math.log1p(math.exp(y))


def _sp_inv(x):
    d = -math.expm1(-x)
    y = x + math.log(d)
    return y + (x - _sp(y)) / d


def tau(y):
    """Softplus ``log(1 + exp(y))``, overflow safe.

    Raises
    ------
    DomainError
        If any input is NaN or infinite.
    """
    if _scalar(y):
        return _sp(_fin_scalar(y))
    y = _as_float(y)
    _check_finite(y)
    return _out(_softplus(y))


def tau_inv(x):
    """Inverse softplus ``x + log(-expm1(-x))``; defined for ``x > 0``."""
    if _scalar(x):
        return _sp_inv(_pos_scalar(x))
    x = _as_float(x)
    _check_positive(x)
    return _out(_softplus_inv(x))


def t_add(x1, x2):
    """Transformed-linear sum ``x1 (+) x2``."""
    if _scalar(x1, x2):
        return _sp(_sp_inv(_pos_scalar(x1, "x1")) + _sp_inv(_pos_scalar(x2, "x2")))
    x1 = _as_float(x1)
    x2 = _as_float(x2)
    _check_positive(x1, "x1")
    _check_positive(x2, "x2")
    return _out(_softplus(_softplus_inv(x1) + _softplus_inv(x2)))


def t_scale(a, x):
    """Transformed-linear scalar multiple ``a (.) x``. Negative ``a`` is allowed."""
    if _scalar(a, x):
        return _sp(_fin_scalar(a, "a") * _sp_inv(_pos_scalar(x)))
    a = _as_float(a)
    x = _as_float(x)
    _check_finite(a, "a")
    _check_positive(x)
    return _out(_softplus(a * _softplus_inv(x)))


def t_sub(x1, x2):
    """Transformed-linear difference ``x1 (-) x2``, i.e. ``t_combine([1, -1], [x1, x2])``."""
    if _scalar(x1, x2):
        return _sp(_sp_inv(_pos_scalar(x1, "x1")) - _sp_inv(_pos_scalar(x2, "x2")))
    x1 = _as_float(x1)
    x2 = _as_float(x2)
    _check_positive(x1, "x1")
    _check_positive(x2, "x2")
    return _out(_softplus(_softplus_inv(x1) - _softplus_inv(x2)))


def t_combine(coeffs, xs):
    """Fused transformed-linear combination ``(+)_j coeffs[j] (.) xs[j]``.

    Equivalent to folding :func:`t_scale` and :func:`t_add` left to right but
    evaluated as a single ``tau(sum_j a_j * tau_inv(x_j))``.

    Parameters
    ----------
    coeffs : array_like, shape (m,)
    xs : array_like, shape (m,)
        Strictly positive values.
    """
    a = np.asarray(coeffs, dtype=np.float64)
    x = np.asarray(xs, dtype=np.float64)
    if a.ndim != 1 or x.ndim != 1:
        raise DomainError("coeffs and xs must be one-dimensional")
    if a.size == 0:
        raise DomainError("t_combine needs at least one term")
    if a.size != x.size:
        raise DomainError(f"length mismatch: {a.size} coefficients vs {x.size} values")
    _check_finite(a, "coeffs")
    _check_positive(x, "xs")
    return float(_softplus(np.dot(a, _softplus_inv(x))))
