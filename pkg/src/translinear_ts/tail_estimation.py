"""From raw observations to a tail pairwise dependence function (TPDF).

The usual path is::

    fit = fit_marginal(raw, 0.99)
    x = preprocess(marginal_transform(raw, fit))
    tpdf = estimate_tpdf(x, max_lag=500, radial_quantile=0.99)
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ArgumentError, DomainError, EstimationError
from .series import Series, as_series
from .validation import check_count, check_probability, check_series_array

__all__ = [
    "MarginalFit",
    "Tpdf",
    "hill_estimator",
    "scale_estimator",
    "fit_marginal",
    "marginal_transform",
    "back_transform",
    "preprocess",
    "estimate_tpdf",
    "chi_estimator",
]

MIN_EXCEEDANCES = 30
MIN_HILL_SAMPLE = 100


@dataclass(frozen=True)
class MarginalFit:
    """Tail index ``alpha_hat`` and tail scale ``c_hat`` with ``P(X > x) ~ c x**-alpha``.

    ``method`` is ``"hill"`` for data-driven fits and ``"fixed"`` when the
    parameters are known (for example the square-root map for unit-Fréchet
    data is ``alpha_hat=1, c_hat=1``).
    """

    alpha_hat: float
    c_hat: float
    threshold_quantile: float | None = None
    n_exceed: int | None = None
    threshold: float | None = None
    method: str = "hill"
    min_exceed: int = MIN_EXCEEDANCES

    def __post_init__(self):
        for name in ("alpha_hat", "c_hat"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ArgumentError(f"{name} must be positive, got {v}")
        if self.method == "hill" and (self.n_exceed is None or self.n_exceed < self.min_exceed):
            raise EstimationError(
                f"marginal fit used {self.n_exceed} exceedances; at least {self.min_exceed} required")

    @classmethod
    def fixed(cls, alpha_hat, c_hat=1.0):
        return cls(alpha_hat=float(alpha_hat), c_hat=float(c_hat), method="fixed")

    def to_dict(self):
        return {"alpha_hat": self.alpha_hat, "c_hat": self.c_hat,
                "threshold_quantile": self.threshold_quantile,
                "threshold": self.threshold, "n_exceed": self.n_exceed,
                "method": self.method}

    @classmethod
    def from_dict(cls, d):
        keys = ("alpha_hat", "c_hat", "threshold_quantile", "n_exceed", "threshold", "method")
        return cls(**{k: d[k] for k in keys if k in d})


@dataclass(frozen=True)
class Tpdf:
    """TPDF values ``sigma[h]`` on lags ``h = 0..max_lag``.

    Lags beyond the grid are treated as exactly zero by consumers.
    """

    sigma: np.ndarray
    radial_quantile: float | None = None
    n_pairs_used: np.ndarray | None = None
    n_clamped: int = 0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=np.float64)
        if s.ndim != 1 or s.size < 1:
            raise ArgumentError("sigma must be a non-empty 1-D array")
        if not np.all(np.isfinite(s)):
            raise DomainError("sigma must be finite")
        if s[0] <= 0:
            raise DomainError(f"sigma(0) must be positive, got {s[0]}")
        if np.any(np.abs(s[1:]) > s[0] * (1 + 1e-12)):
            raise DomainError("|sigma(h)| exceeds sigma(0): not a valid TPDF")
        s.setflags(write=False)
        object.__setattr__(self, "sigma", s)
        if self.n_pairs_used is not None:
            object.__setattr__(self, "n_pairs_used", np.asarray(self.n_pairs_used, dtype=np.int64))

    @property
    def max_lag(self):
        return self.sigma.size - 1

    def at(self, lags):
        """``sigma(|h|)`` with zero beyond the grid."""
        h = np.abs(np.asarray(lags, dtype=np.int64))
        out = np.zeros(h.shape)
        inside = h <= self.max_lag
        out[inside] = self.sigma[h[inside]]
        return out

    def ratio(self):
        return self.sigma / self.sigma[0]


def _tail_order_stats(x, threshold_quantile):
    x = check_series_array(x, name="data")
    check_probability(threshold_quantile, "threshold_quantile")
    pos = x[x > 0]
    if pos.size < MIN_HILL_SAMPLE:
        raise EstimationError(
            f"tail estimation needs at least {MIN_HILL_SAMPLE} positive values, got {pos.size}")
    threshold = float(np.quantile(x, threshold_quantile))
    xs = np.sort(x)
    k = int(np.count_nonzero(xs > threshold))
    if k < MIN_EXCEEDANCES:
        raise EstimationError(
            f"only {k} exceedances above the {threshold_quantile} quantile; "
            f"at least {MIN_EXCEEDANCES} required")
    # x_(n-k): the largest order statistic not above the threshold
    anchor = xs[xs.size - k - 1]
    if anchor <= 0:
        raise EstimationError("tail anchor order statistic is not positive")
    return xs, k, anchor, threshold


def hill_estimator(data, threshold_quantile=0.99):
    """Hill estimate of the tail index from exceedances of an empirical quantile.

    ``alpha_hat = 1 / mean(log(x_(n-i+1) / x_(n-k)))`` over the ``k`` values
    strictly above the ``threshold_quantile`` empirical quantile.
    """
    xs, k, anchor, _ = _tail_order_stats(data, threshold_quantile)
    top = xs[xs.size - k:]
    return float(1.0 / np.mean(np.log(top / anchor)))


def scale_estimator(data, alpha_hat, threshold_quantile=0.99):
    """Tail scale ``c`` in ``P(X > u) ~ c u**-alpha``, estimated as ``(k/n) u**alpha_hat``.

    ``u`` is the order statistic ``x_(n-k)`` just below the exceedances.
    """
    if not np.isfinite(alpha_hat) or alpha_hat <= 0:
        raise ArgumentError(f"alpha_hat must be positive, got {alpha_hat}")
    xs, k, anchor, _ = _tail_order_stats(data, threshold_quantile)
    return float(k / xs.size * anchor ** alpha_hat)


def fit_marginal(data, threshold_quantile=0.99):
    """Hill tail index and plug-in scale at one threshold, bundled as a :class:`MarginalFit`."""
    xs, k, anchor, threshold = _tail_order_stats(data, threshold_quantile)
    alpha = float(1.0 / np.mean(np.log(xs[xs.size - k:] / anchor)))
    c = float(k / xs.size * anchor ** alpha)
    return MarginalFit(alpha_hat=alpha, c_hat=c, threshold_quantile=float(threshold_quantile),
                       n_exceed=k, threshold=threshold)


def marginal_transform(data, fit, negative="raise"):
    """Map original-scale data to tail index 2 and unit scale: ``c**-0.5 * x**(alpha/2)``.

    The map only makes sense for nonnegative values. With ``negative="clip"``
    negative observations (anomalies, say) are sent to 0 first; only the
    upper tail matters downstream and preprocessing clamps at 0 anyway.
    """
    series = as_series(data, "original")
    x = series.values
    if negative == "clip":
        x = np.maximum(x, 0.0)
    elif negative != "raise":
        raise ArgumentError(f"negative must be 'raise' or 'clip', got {negative!r}")
    elif np.any(x < 0):
        raise DomainError("marginal_transform needs nonnegative data (or negative='clip')")
    out = fit.c_hat ** -0.5 * x ** (fit.alpha_hat / 2.0)
    return series.with_values(out, scale_tag="frechet2_unit")


def back_transform(data, fit):
    """Inverse of :func:`marginal_transform`: ``(c**0.5 * x)**(2/alpha)``."""
    series = as_series(data, "frechet2_unit")
    x = series.values
    if np.any(x < 0):
        raise DomainError("back_transform needs nonnegative data")
    if series.scale_tag == "original":
        raise ArgumentError("series is already on the original scale")
    out = (fit.c_hat ** 0.5 * x) ** (2.0 / fit.alpha_hat)
    return series.with_values(out, scale_tag="original")


def preprocess(data):
    """Subtract the mean and clamp negatives to zero.

    Not idempotent: a second call shifts by the new (positive) mean again.
    """
    series = as_series(data, "frechet2_unit")
    if series.scale_tag == "original":
        raise ArgumentError("preprocess expects marginally transformed data")
    x = series.values
    return series.with_values(np.maximum(x - x.mean(), 0.0), scale_tag="preprocessed")


def _tpdf_lag(x, h, radial_quantile):
    a = x[:-h]
    b = x[h:]
    r2 = a * a + b * b
    u2 = np.quantile(r2, radial_quantile)
    keep = r2 > u2
    n = int(np.count_nonzero(keep))
    if n == 0:
        return 0.0, 0
    return 2.0 * float(np.mean(a[keep] * b[keep] / r2[keep])), n


def estimate_tpdf(data, max_lag, radial_quantile=0.99, *, min_pairs=MIN_EXCEEDANCES):
    """Estimate ``sigma(h)``, ``h = 0..max_lag``, from radially large lagged pairs.

    For each lag the pairs ``(x_t, x_{t+h})`` whose Euclidean norm exceeds
    that lag's empirical ``radial_quantile`` contribute
    ``2 * mean(x_t * x_{t+h} / r_t**2)``. ``sigma(0)`` is 1 by convention,
    which matches data standardised to unit tail ratio.

    Raises
    ------
    EstimationError
        If some lag keeps fewer than ``min_pairs`` exceedances.
    """
    x = check_series_array(data, name="data", nonnegative=True)
    max_lag = check_count(max_lag, "max_lag", minimum=0)
    check_probability(radial_quantile, "radial_quantile")
    if max_lag >= x.size / 10:
        raise ArgumentError(f"max_lag={max_lag} must be below length/10 = {x.size / 10:g}")
    sigma = np.empty(max_lag + 1)
    counts = np.empty(max_lag + 1, dtype=np.int64)
    sigma[0] = 1.0
    counts[0] = x.size
    for h in range(1, max_lag + 1):
        sigma[h], counts[h] = _tpdf_lag(x, h, radial_quantile)
        if counts[h] < min_pairs:
            raise EstimationError(f"lag {h}: only {counts[h]} radial exceedances (< {min_pairs})")
    clamped = int(np.count_nonzero((sigma < 0) | (sigma > 1)))
    sigma = np.clip(sigma, 0.0, 1.0)
    return Tpdf(sigma=sigma, radial_quantile=float(radial_quantile), n_pairs_used=counts,
                n_clamped=clamped)


def chi_estimator(data, lag=1, quantile=0.95):
    """Empirical ``P(X_{t+lag} > u | X_t > u)`` at the empirical ``quantile`` ``u``."""
    x = check_series_array(data, name="data")
    lag = check_count(lag, "lag")
    check_probability(quantile, "quantile", 0.8, 1.0, closed_low=True)
    if lag >= x.size:
        raise ArgumentError("lag must be shorter than the series")
    u = np.quantile(x, quantile)
    first = x[:-lag] > u
    both = first & (x[lag:] > u)
    k = int(np.count_nonzero(first))
    if k < MIN_EXCEEDANCES:
        raise EstimationError(f"only {k} exceedances at quantile {quantile}")
    return float(np.count_nonzero(both) / k)
