"""Transformed-linear innovations algorithm, projection weights and one-step prediction.

With the TPDF ``sigma`` standing in for the inner product, the recursion is::

    nu_0         = sigma(0)
    theta_{n,n-k} = (sigma(n-k) - sum_{j<k} theta_{k,k-j} theta_{n,n-j} nu_j) / nu_k
    nu_n         = sigma(0) - sum_{j<n} theta_{n,n-j}**2 nu_j

All predictors are linear on the ``tau_inv`` scale, which is how they are
evaluated here.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import linalg

from .exceptions import ArgumentError, ConvergenceError, DomainError, SingularityError
from .series import Series, as_series
from .simulators import MaModel
from .tail_estimation import Tpdf
from .translinear import ZERO, _softplus, _softplus_inv, t_combine
from .validation import check_count, check_series_array

__all__ = [
    "InnovationsState",
    "PredictorWeights",
    "innovations_algorithm",
    "fit_ma",
    "ma_tpdf",
    "direct_predictor_weights",
    "one_step_predict",
    "rolling_predict",
    "innovations_predict",
    "ZERO_FLOOR",
]

ZERO_FLOOR = 1e-10
SINGULAR_RATIO = 1e-10
CONV_TOL = 1e-6
CONV_ROWS = 10


@dataclass(frozen=True)
class InnovationsState:
    """Output of :func:`innovations_algorithm`.

    ``theta[n, j]`` holds ``theta_{n,j}`` for ``1 <= j <= n <= n_max``
    (entries outside the triangle are zero); ``nu[n]`` is the squared
    distance of the ``n``-step predictor.
    """

    theta: np.ndarray
    nu: np.ndarray

    @property
    def n_max(self):
        return self.nu.size - 1

    def row(self, n):
        """``(theta_{n,1}, ..., theta_{n,n})``."""
        return self.theta[n, 1:n + 1].copy()

    def last_row_delta(self, n=None, q=None):
        """``max_j |theta_{n,j} - theta_{n-1,j}|`` over ``j <= q``."""
        n = self.n_max if n is None else n
        q = n - 1 if q is None else min(q, n - 1)
        if n < 2 or q < 1:
            return 0.0
        return float(np.max(np.abs(self.theta[n, 1:q + 1] - self.theta[n - 1, 1:q + 1])))


@dataclass(frozen=True)
class PredictorWeights:
    """Weights ``b_{n1}..b_{nn}`` (most recent observation first) and squared distance ``nu``."""

    b: np.ndarray
    nu: float

    @property
    def n(self):
        return self.b.size


@njit(cache=True)
def _innovations_kernel(sigma, n_max, min_nu):
    theta = np.zeros((n_max + 1, n_max + 1))
    nu = np.zeros(n_max + 1)
    nu[0] = sigma[0]
    for n in range(1, n_max + 1):
        for k in range(n):
            acc = sigma[n - k]
            for j in range(k):
                acc -= theta[k, k - j] * theta[n, n - j] * nu[j]
            theta[n, n - k] = acc / nu[k]
        acc = sigma[0]
        for j in range(n):
            t = theta[n, n - j]
            acc -= t * t * nu[j]
        nu[n] = acc
        if acc < min_nu:
            return theta, nu, n
    return theta, nu, -1


def _sigma_grid(tpdf, length):
    s = np.zeros(length)
    m = min(length, tpdf.sigma.size)
    s[:m] = tpdf.sigma[:m]
    return s


def innovations_algorithm(tpdf, n_max):
    """Run the innovations recursion on a TPDF up to ``n_max``.

    ``sigma(h)`` is taken as 0 for lags beyond the supplied grid.

    Raises
    ------
    SingularityError
        When some ``nu_n`` drops below ``1e-10 * sigma(0)``; the TPDF is then
        singular or not nonnegative definite.
    """
    if not isinstance(tpdf, Tpdf):
        raise ArgumentError("tpdf must be a Tpdf")
    n_max = check_count(n_max, "n_max", minimum=0)
    sigma = _sigma_grid(tpdf, n_max + 1)
    theta, nu, bad = _innovations_kernel(sigma, n_max, SINGULAR_RATIO * sigma[0])
    if bad >= 0:
        raise SingularityError(
            f"innovations recursion became singular at n={bad} (nu_n={nu[bad]:.3g}); "
            "the TPDF is not positive definite at this order", n=int(bad))
    theta.setflags(write=False)
    nu.setflags(write=False)
    return InnovationsState(theta=theta, nu=nu)


def fit_ma(state, trunc_eps=1e-3, q_max=25, *, conv_tol=CONV_TOL, conv_rows=CONV_ROWS):
    """Read a transformed-linear MA(q) off the last innovations row.

    The order is the largest ``j`` with ``|theta_{N,j}| >= trunc_eps``, capped
    at ``q_max``; negative coefficients are set to zero, which leaves the TPDF
    unchanged. The noise scale is ``sqrt(nu_N)``.

    Convergence means the last ``conv_rows`` rows each moved by less than
    ``conv_tol`` (max over ``j <= q_max``) from their predecessor.

    Raises
    ------
    ConvergenceError
        If the rows have not settled.
    """
    q_max = check_count(q_max, "q_max", minimum=0)
    N = state.n_max
    if N < conv_rows + 1:
        raise ConvergenceError(f"n_max={N} too small to judge convergence over {conv_rows} rows")
    deltas = [state.last_row_delta(n, q_max) for n in range(N - conv_rows + 1, N + 1)]
    worst = max(deltas) if deltas else 0.0
    if worst >= conv_tol:
        raise ConvergenceError(
            f"innovations coefficients not converged: last-row delta {deltas[-1]:.3g}, "
            f"worst over {conv_rows} rows {worst:.3g} (tol {conv_tol:g})", delta=worst)
    row = state.row(N)
    big = np.flatnonzero(np.abs(row) >= trunc_eps)
    q = min(q_max, int(big[-1]) + 1) if big.size else 0
    theta = np.maximum(row[:q], 0.0)
    return MaModel(theta=tuple(theta), noise_scale=float(np.sqrt(state.nu[N])))


def ma_tpdf(model, max_lag=None):
    """Analytic TPDF ``sigma(h) = c**2 * sum_j theta_j theta_{j+h}`` with ``theta_0 = 1``."""
    psi = model.psi
    q = psi.size - 1
    max_lag = q if max_lag is None else check_count(max_lag, "max_lag", minimum=0)
    sigma = np.zeros(max_lag + 1)
    for h in range(min(q, max_lag) + 1):
        sigma[h] = np.dot(psi[:psi.size - h], psi[h:])
    return Tpdf(sigma=model.noise_scale ** 2 * sigma, metadata={"source": "ma_tpdf"})


def _toeplitz_system(tpdf, n):
    s = _sigma_grid(tpdf, n + 1)
    return linalg.toeplitz(s[:n]), s[1:n + 1], s[0]


def direct_predictor_weights(tpdf, n):
    """Solve ``Sigma_n b = sigma_n`` by Cholesky; ``nu = sigma(0) - sigma_n . b``.

    Raises
    ------
    SingularityError
        If the Toeplitz matrix is not positive definite.
    """
    n = check_count(n, "n")
    mat, rhs, s0 = _toeplitz_system(tpdf, n)
    try:
        factor = linalg.cho_factor(mat, lower=True, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularityError(f"Sigma_{n} is not positive definite: {exc}", n=n) from exc
    b = linalg.cho_solve(factor, rhs, check_finite=False)
    nu = float(s0 - rhs @ b)
    b.setflags(write=False)
    return PredictorWeights(b=b, nu=nu)


def _floored_tau_inv(values, floor):
    return _softplus_inv(np.maximum(values, floor))


def one_step_predict(window, weights, floor=ZERO_FLOOR):
    """``X_hat_{n+1} = (+)_j b_{nj} (.) X_{n+1-j}`` from a chronological window.

    Zeros (left by :func:`~translinear_ts.tail_estimation.preprocess`) are
    replaced by ``floor`` before ``tau_inv``.
    """
    w = check_series_array(window, name="window", nonnegative=True)
    b = weights.b if isinstance(weights, PredictorWeights) else np.asarray(weights, dtype=np.float64)
    if w.size != b.size:
        raise DomainError(f"window length {w.size} does not match {b.size} weights")
    return t_combine(b, np.maximum(w[::-1], floor))


def rolling_predict(data, weights, floor=ZERO_FLOOR):
    """One-step predictions for every position with a full window.

    Element ``i`` predicts ``data[n + i]`` from ``data[i:n + i]`` where ``n``
    is the number of weights, so the output has ``len(data) - n`` entries.
    """
    x = check_series_array(data, name="data", nonnegative=True)
    b = weights.b if isinstance(weights, PredictorWeights) else np.asarray(weights, dtype=np.float64)
    n = b.size
    if x.size <= n:
        raise ArgumentError(f"need more than {n} observations, got {x.size}")
    y = _floored_tau_inv(x, floor)
    # correlate so that b[0] multiplies the most recent value
    yhat = np.convolve(y, b, mode="valid")[:-1] if n > 0 else np.zeros(x.size)
    return _softplus(yhat)


def innovations_predict(data, state, floor=ZERO_FLOOR):
    """Fitted one-step predictions ``X_hat_1..X_hat_m`` via the innovations form.

    ``X_hat_1`` is the zero element ``log 2``; afterwards
    ``X_hat_{n+1} = (+)_j theta_{nj} (.) (X_{n+1-j} (-) X_hat_{n+1-j})``.
    """
    series = as_series(data, "preprocessed")
    x = check_series_array(series, name="data", nonnegative=True)
    m = x.size
    if state.n_max < m - 1:
        raise ArgumentError(f"state has n_max={state.n_max}; need at least {m - 1}")
    y = _floored_tau_inv(x, floor)
    yhat = np.zeros(m)
    innov = np.empty(m)
    innov[0] = y[0]
    for n in range(1, m):
        # theta[n, 1..n] pairs with innovations n-1, ..., 0
        yhat[n] = state.theta[n, 1:n + 1] @ innov[n - 1::-1]
        innov[n] = y[n] - yhat[n]
    out = _softplus(yhat)
    out[0] = ZERO
    return series.with_values(out)
