"""Seeded generators for the processes used throughout the package.

Every function takes an integer ``seed`` and draws from a PCG64 stream, so
the same (parameters, seed) pair reproduces the same output on any platform.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .exceptions import ArgumentError
from .series import Series
from .translinear import _softplus, _softplus_inv
from .validation import as_generator, check_count, check_positive

__all__ = [
    "MaModel",
    "frechet_noise",
    "simulate_ma",
    "simulate_garch11",
    "simulate_logistic_markov",
    "logistic_conditional_cdf",
]

GARCH_BURN_IN = 1000


@dataclass(frozen=True)
class MaModel:
    """Transformed-linear MA(q): ``X_t = Z_t (+) theta_1 (.) Z_{t-1} (+) ... (+) theta_q (.) Z_{t-q}``.

    ``theta`` excludes the implicit leading 1. ``noise_scale`` is the Fréchet
    scale ``c`` of the noise, so the noise tail ratio is ``c**2``.
    """

    theta: tuple = ()
    noise_scale: float = 1.0

    def __post_init__(self):
        theta = tuple(float(t) for t in np.atleast_1d(np.asarray(self.theta, dtype=np.float64)))
        if any(not np.isfinite(t) or t < 0 for t in theta):
            raise ArgumentError("MA coefficients must be finite and nonnegative")
        check_positive(self.noise_scale, "noise_scale")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "noise_scale", float(self.noise_scale))

    @property
    def order(self):
        return len(self.theta)

    @property
    def psi(self):
        """Coefficients including the leading ``theta_0 = 1``."""
        return np.concatenate(([1.0], np.asarray(self.theta, dtype=np.float64)))

    def to_dict(self):
        return {"theta": list(self.theta), "noise_scale": self.noise_scale}

    @classmethod
    def from_dict(cls, d):
        return cls(theta=tuple(d.get("theta", ())), noise_scale=d.get("noise_scale", 1.0))


def _frechet2(rng, n, scale):
    u = rng.random(n)
    u[u == 0.0] = 2.0 ** -53
    return scale * (-np.log(u)) ** -0.5


def frechet_noise(n, scale=1.0, seed=0):
    """I.i.d. Fréchet draws with tail index 2: ``P(Z <= z) = exp(-(scale/z)**2)``.

    Sampled by inverse transform ``z = scale * (-log U)**(-1/2)``.
    """
    n = check_count(n, "n")
    scale = check_positive(scale, "scale")
    rng = as_generator(seed)
    return Series(_frechet2(rng, n, scale), scale_tag="frechet2_unit",
                  metadata={"source": "frechet_noise", "scale": scale})


def simulate_ma(model, n, seed=0):
    """Simulate ``n`` values of a transformed-linear MA(q) with Fréchet(2, c) noise.

    The first ``q`` noise draws only feed the lagged terms (burn-in), so the
    returned series is exactly stationary.
    """
    n = check_count(n, "n")
    if not isinstance(model, MaModel):
        raise ArgumentError("model must be an MaModel")
    rng = as_generator(seed)
    q = model.order
    z = _frechet2(rng, n + q, model.noise_scale)
    # transformed-linear filtering is ordinary filtering on the tau_inv scale
    y = np.convolve(_softplus_inv(z), model.psi, mode="valid")
    return Series(_softplus(y), scale_tag="frechet2_unit",
                  metadata={"source": "simulate_ma", **model.to_dict()})


def simulate_garch11(alpha0, alpha1, beta1, n, seed=0, burn_in=GARCH_BURN_IN):
    """Absolute values of a Gaussian GARCH(1,1) process.

    ``sigma2_t = alpha0 + alpha1 * eps_{t-1}**2 + beta1 * sigma2_{t-1}`` and
    ``eps_t = sigma_t * eta_t``. The recursion starts at the stationary
    variance and runs ``burn_in`` steps before output begins.
    """
    alpha0 = check_positive(alpha0, "alpha0")
    if alpha1 < 0 or beta1 < 0:
        raise ArgumentError("alpha1 and beta1 must be nonnegative")
    if alpha1 + beta1 >= 1:
        raise ArgumentError(f"alpha1 + beta1 = {alpha1 + beta1} >= 1: not covariance stationary")
    n = check_count(n, "n")
    burn_in = check_count(burn_in, "burn_in", minimum=0)
    rng = as_generator(seed)
    eta = rng.standard_normal(n + burn_in)
    eps = _garch_recursion(eta, float(alpha0), float(alpha1), float(beta1))
    return Series(np.abs(eps[burn_in:]), scale_tag="original",
                  metadata={"source": "simulate_garch11", "alpha0": alpha0,
                            "alpha1": alpha1, "beta1": beta1})


@njit(cache=True)
def _garch_recursion(eta, a0, a1, b1):
    out = np.empty_like(eta)
    s2 = a0 / (1.0 - a1 - b1)
    e_prev = 0.0
    for t in range(eta.size):
        if t > 0:
            s2 = a0 + a1 * e_prev * e_prev + b1 * s2
        e_prev = np.sqrt(s2) * eta[t]
        out[t] = e_prev
    return out


def logistic_conditional_cdf(y, x, beta):
    """``P(X_{t+1} <= y | X_t = x)`` for the bivariate logistic with unit-Fréchet margins.

    Derived from ``F(x, y) = exp(-(x**(-1/beta) + y**(-1/beta))**beta)`` as
    ``dF/dx`` divided by the unit-Fréchet density.
    """
    y = np.asarray(y, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    s = (y / x) ** (-1.0 / beta)
    log_f = -np.expm1(beta * np.log1p(s)) / x + (beta - 1.0) * np.log1p(s)
    return np.exp(log_f)


@njit(cache=True)
def _cond_log_cdf(log_r, x, beta):
    s = np.exp(-log_r / beta)
    lp = np.log1p(s)
    return -np.expm1(beta * lp) / x + (beta - 1.0) * lp


@njit(cache=True)
def _logistic_chain(x0, log_u, beta, rtol):
    n = log_u.size + 1
    out = np.empty(n)
    out[0] = x0
    x = x0
    for t in range(1, n):
        target = log_u[t - 1]
        lo = -1.0
        hi = 1.0
        while _cond_log_cdf(lo, x, beta) > target:
            lo *= 2.0
        while _cond_log_cdf(hi, x, beta) < target:
            hi *= 2.0
        # bisection on log(y / x); width rtol in log space is rtol relative in y
        while hi - lo > rtol:
            mid = 0.5 * (lo + hi)
            if _cond_log_cdf(mid, x, beta) < target:
                lo = mid
            else:
                hi = mid
        x = x * np.exp(0.5 * (lo + hi))
        out[t] = x
    return out


def simulate_logistic_markov(beta, n, seed=0, rtol=1e-10):
    """First-order Markov chain whose consecutive pairs are bivariate logistic.

    Margins are unit Fréchet. ``beta = 1`` gives independence; smaller
    ``beta`` gives stronger extremal dependence (``chi = 2 - 2**beta``).
    The chain starts from the stationary law, so no burn-in is needed.
    """
    if not (0 < beta <= 1):
        raise ArgumentError(f"beta must lie in (0, 1], got {beta}")
    n = check_count(n, "n")
    rng = as_generator(seed)
    u = rng.random(n)
    u[u == 0.0] = 2.0 ** -53
    x0 = -1.0 / np.log(u[0])
    chain = _logistic_chain(x0, np.log(u[1:]), float(beta), float(rtol))
    return Series(chain, scale_tag="original",
                  metadata={"source": "simulate_logistic_markov", "beta": float(beta)})
