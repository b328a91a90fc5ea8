"""Prediction uncertainty for large one-step predictions.

The tail dependence between a prediction ``X_hat`` and its target ``X`` is
summarised by the 2x2 prediction TPDM. Factoring it as ``B @ B.T`` with
``B >= 0`` (a completely positive decomposition) turns each column of ``B``
into a point mass of an angular measure; the angular measure then gives a
joint region and, through a kernel density, conditional intervals for ``X``
given a large ``X_hat``.

Angles are measured as ``atan2(w_target, w_prediction)``, so 0 is the
prediction axis and ``pi/2`` the target axis.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg, stats

from .exceptions import ArgumentError, DecompositionError, EstimationError
from .innovations import direct_predictor_weights, rolling_predict
from .validation import as_generator, check_count, check_positive, check_probability, check_series_array

__all__ = [
    "PredictionTpdm",
    "AngularMeasure",
    "AngularDensity",
    "IntervalSet",
    "prediction_tpdm",
    "cp_decompose",
    "cp_decompose_many",
    "angular_measure",
    "joint_region",
    "region_coverage",
    "angular_density",
    "conditional_interval",
    "conditional_intervals",
    "gaussian_baseline",
]

HALF_PI = 0.5 * np.pi


@dataclass(frozen=True)
class PredictionTpdm:
    """``[[s, s], [s, sigma0]]`` with ``s = sigma_n' Sigma_n^{-1} sigma_n``."""

    s: float
    sigma0: float

    @property
    def m(self):
        return np.array([[self.s, self.s], [self.s, self.sigma0]])

    @property
    def trace(self):
        return self.s + self.sigma0


@dataclass(frozen=True)
class AngularMeasure:
    """Weighted point masses on the nonnegative quarter circle.

    ``points`` is an ``(m, 2)`` array of unit vectors and ``masses`` their
    (positive) weights.
    """

    points: np.ndarray
    masses: np.ndarray
    n_decomp: int = 1
    q_star: int = 0

    @property
    def angles(self):
        return np.arctan2(self.points[:, 1], self.points[:, 0])

    @property
    def total_mass(self):
        return float(self.masses.sum())

    def __len__(self):
        return self.masses.size


@dataclass(frozen=True)
class AngularDensity:
    """Kernel density of an angular measure tabulated on ``[0, pi/2]``.

    Integrates (trapezoid rule) to the total mass of the measure, not to one.
    """

    grid: np.ndarray
    values: np.ndarray
    bandwidth: float
    total_mass: float

    def __call__(self, angle):
        return np.interp(angle, self.grid, self.values)


@dataclass
class IntervalSet:
    """Rows of (prediction, lower, upper[, actual]) plus the time index of each row.

    Lower bounds must be nonnegative unless ``signed`` is set, which is only
    meant for baselines computed on real-valued data.
    """

    x_hat: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    actual: np.ndarray | None = None
    index: np.ndarray | None = None
    signed: bool = False

    def __post_init__(self):
        self.x_hat = np.asarray(self.x_hat, dtype=np.float64)
        self.lower = np.asarray(self.lower, dtype=np.float64)
        self.upper = np.asarray(self.upper, dtype=np.float64)
        if self.actual is not None:
            self.actual = np.asarray(self.actual, dtype=np.float64)
        if np.any(self.lower > self.upper):
            raise ArgumentError("interval lower bound exceeds upper bound")
        if not self.signed and np.any(self.lower < 0):
            raise ArgumentError("interval lower bounds must be nonnegative")

    def __len__(self):
        return self.x_hat.size


def prediction_tpdm(tpdf, n):
    """Prediction TPDM for the ``n``-lag projection predictor."""
    w = direct_predictor_weights(tpdf, n)
    s = float(tpdf.at(np.arange(1, n + 1)) @ w.b)
    return PredictionTpdm(s=max(s, 0.0), sigma0=float(tpdf.sigma[0]))


def _as_matrix(A):
    return A.m if isinstance(A, PredictionTpdm) else np.asarray(A, dtype=np.float64)


def _psd_sqrt(A):
    vals, vecs = linalg.eigh(A)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def _random_orthogonal(rng, q):
    z = rng.standard_normal((q, q))
    qm, r = np.linalg.qr(z)
    return qm * np.sign(np.diag(r))


def _cp_attempt(C, Q, tol, max_iter):
    for it in range(max_iter):
        M = C @ Q
        P = np.maximum(M, 0.0)
        if np.linalg.norm(M - P) < tol:
            return P, it
        # orthogonal Procrustes: argmin_Q ||C Q - P||_F
        u, _, vt = np.linalg.svd(C.T @ P)
        Q = u @ vt
    return None, max_iter


def cp_decompose(A, q_star=5, seed=0, tol=1e-10, max_iter=5000, *, residual_tol=1e-8, n_starts=1):
    """Completely positive factor ``B >= 0`` (2 x q_star) with ``B @ B.T = A``.

    Starting from ``C = [A^{1/2} | 0]`` and a random orthogonal ``Q``, the
    iteration alternates ``P = max(C Q, 0)`` with the Procrustes update
    ``Q = polar(C' P)`` until ``C Q`` is nonnegative to within ``tol``. A
    final row rescaling makes the diagonal of ``B @ B.T`` match ``A``.

    ``n_starts`` random starts are tried from the same seeded stream.

    Raises
    ------
    DecompositionError
        If no start reaches ``tol`` within ``max_iter`` iterations.
    """
    A = _as_matrix(A)
    if A.shape != (2, 2) or not np.allclose(A, A.T) or np.any(A < 0):
        raise ArgumentError("A must be a symmetric 2x2 matrix with nonnegative entries")
    if np.linalg.eigvalsh(A)[0] < -1e-12 * max(1.0, np.trace(A)):
        raise ArgumentError("A is not positive semidefinite")
    q_star = check_count(q_star, "q_star", minimum=2)
    rng = as_generator(seed)
    C = np.zeros((2, q_star))
    C[:, :2] = _psd_sqrt(A)
    for _ in range(n_starts):
        B, _ = _cp_attempt(C, _random_orthogonal(rng, q_star), tol, max_iter)
        if B is None:
            continue
        got = np.einsum("ij,ij->i", B, B)
        scale = np.where(got > 0, np.sqrt(np.divide(np.diag(A), got, out=np.ones(2), where=got > 0)), 1.0)
        B = B * scale[:, None]
        if np.linalg.norm(B @ B.T - A) <= residual_tol:
            return B
    raise DecompositionError(
        f"completely positive decomposition did not converge after {n_starts} start(s) "
        f"of {max_iter} iterations")


def cp_decompose_many(A, n_decomp=100, q_star=5, seed=0, *, tol=1e-10, max_iter=5000, retries=20):
    """``n_decomp`` independent decompositions; replicate ``k`` uses seed ``seed + k``."""
    n_decomp = check_count(n_decomp, "n_decomp")
    return [cp_decompose(A, q_star, seed + k, tol, max_iter, n_starts=retries)
            for k in range(n_decomp)]


def angular_measure(Bs, *, zero_tol=1e-14):
    """Angular measure with mass ``|b|**2 / n_decomp`` at ``b / |b|`` for every column ``b``."""
    Bs = [np.asarray(B, dtype=np.float64) for B in Bs]
    if not Bs:
        raise ArgumentError("need at least one decomposition")
    shape = Bs[0].shape
    if any(B.shape != shape for B in Bs):
        raise ArgumentError("all decompositions must share a shape")
    cols = np.concatenate([B.T for B in Bs], axis=0)
    norms = np.linalg.norm(cols, axis=1)
    keep = norms > zero_tol
    pts = cols[keep] / norms[keep, None]
    masses = norms[keep] ** 2 / len(Bs)
    return AngularMeasure(points=pts, masses=masses, n_decomp=len(Bs), q_star=shape[1])


def _weighted_quantile(values, weights, probs):
    order = np.argsort(values, kind="stable")
    v = values[order]
    cw = np.cumsum(weights[order])
    cw /= cw[-1]
    idx = np.searchsorted(cw, np.asarray(probs) - 1e-12, side="left")
    return v[np.minimum(idx, v.size - 1)]


def joint_region(H, level=0.95):
    """Angular interval between the mass-weighted ``(1-level)/2`` and ``(1+level)/2`` quantiles."""
    check_probability(level, "level")
    if len(H) == 0 or H.total_mass <= 0:
        raise ArgumentError("angular measure is empty")
    alpha = (1.0 - level) / 2.0
    lo, hi = _weighted_quantile(H.angles, H.masses, [alpha, 1.0 - alpha])
    return float(lo), float(hi)


def region_coverage(x_hat, actual, region, radial_quantile=0.95):
    """Share of radially large ``(x_hat, actual)`` pairs whose angle lies in ``region``.

    Returns ``(coverage, n_large)``.
    """
    xh = check_series_array(x_hat, name="x_hat")
    xa = check_series_array(actual, name="actual")
    if xh.size != xa.size:
        raise ArgumentError("x_hat and actual differ in length")
    r = np.hypot(xh, xa)
    large = r > np.quantile(r, radial_quantile)
    ang = np.arctan2(xa[large], xh[large])
    inside = (ang >= region[0]) & (ang <= region[1])
    return float(inside.mean()), int(large.sum())


def _silverman(angles, masses):
    w = masses / masses.sum()
    mean = np.sum(w * angles)
    sd = np.sqrt(np.sum(w * (angles - mean) ** 2))
    q25, q75 = _weighted_quantile(angles, masses, [0.25, 0.75])
    spread = min(sd, (q75 - q25) / 1.34) if q75 > q25 else sd
    n_eff = 1.0 / np.sum(w ** 2)
    return 0.9 * spread * n_eff ** -0.2


def angular_density(H, bandwidth=None, grid_size=1024):
    """Mass-weighted Gaussian KDE of the angles, reflected at 0 and ``pi/2``.

    The default bandwidth is Silverman's rule on the mass-weighted angles
    (effective sample size ``1 / sum(w**2)``); a degenerate sample falls back
    to 0.01 radians.
    """
    if len(H) == 0 or H.total_mass <= 0:
        raise ArgumentError("angular measure is empty")
    ang = H.angles
    if bandwidth is None:
        bandwidth = _silverman(ang, H.masses)
        if not np.isfinite(bandwidth) or bandwidth <= 0:
            bandwidth = 0.01
    bandwidth = check_positive(bandwidth, "bandwidth")
    grid_size = check_count(grid_size, "grid_size", minimum=2)
    grid = np.linspace(0.0, HALF_PI, grid_size)
    centers = np.concatenate([ang, -ang, np.pi - ang])
    weights = np.tile(H.masses, 3)
    kern = stats.norm.pdf((grid[:, None] - centers[None, :]) / bandwidth) / bandwidth
    values = kern @ weights
    return AngularDensity(grid=grid, values=values, bandwidth=float(bandwidth),
                          total_mass=H.total_mass)


def _conditional_angle_cdf(h):
    # Given X_hat = x1, the angle of (x1, X) has density proportional to
    # cos(phi)**2 * h(phi): the limit measure is 2 r**-3 dr H(dphi) and
    # dx2 = r**2 / x1 dphi at fixed x1.
    dens = np.cos(h.grid) ** 2 * h.values
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(h.grid))))
    total = cdf[-1]
    if not np.isfinite(total) or total <= 0:
        raise EstimationError("conditional density has no mass on the grid")
    return cdf / total


def _angle_quantiles(h, probs):
    cdf = _conditional_angle_cdf(h)
    # cdf is nondecreasing; collapse flat stretches so interp is well defined
    keep = np.concatenate(([True], np.diff(cdf) > 0))
    phi = np.interp(probs, cdf[keep], h.grid[keep])
    return np.minimum(phi, h.grid[-2])


def conditional_interval(x1, h, level=0.95):
    """Central ``level`` interval for ``X`` given a large prediction ``X_hat = x1``.

    Uses the regular-variation approximation to the conditional density,
    ``f(x2 | x1)`` proportional to ``|(x1, x2)|**-5 * x2 * h_w(x1 / |(x1, x2)|)``
    with ``h_w`` the angular density per unit of the first coordinate. The
    quantiles are taken on the angle scale, where the conditional law has
    density proportional to ``cos(phi)**2 h(phi)``, and mapped back through
    ``x2 = x1 * tan(phi)``; the interval therefore scales linearly in ``x1``.
    """
    x1 = check_positive(x1, "x1")
    check_probability(level, "level")
    a = (1.0 - level) / 2.0
    lo, hi = _angle_quantiles(h, [a, 1.0 - a])
    return float(x1 * np.tan(lo)), float(x1 * np.tan(hi))


def conditional_intervals(x_hat, h, level=0.95, actual=None, index=None):
    """Vectorised :func:`conditional_interval` returning an :class:`IntervalSet`."""
    xh = check_series_array(x_hat, name="x_hat")
    if np.any(xh <= 0):
        raise ArgumentError("predictions must be positive")
    check_probability(level, "level")
    a = (1.0 - level) / 2.0
    lo, hi = _angle_quantiles(h, [a, 1.0 - a])
    return IntervalSet(x_hat=xh, lower=xh * np.tan(lo), upper=xh * np.tan(hi),
                       actual=actual, index=index)


def _normal_scores(sorted_train, values):
    n = sorted_train.size
    pp = (np.arange(1, n + 1) - 0.5) / n
    return stats.norm.ppf(np.interp(values, sorted_train, pp))


def _from_normal(sorted_train, z):
    n = sorted_train.size
    pp = (np.arange(1, n + 1) - 0.5) / n
    return np.interp(stats.norm.cdf(z), pp, sorted_train)


def gaussian_baseline(train, test, n, level=0.95):
    """Gaussian prediction intervals on normal scores, mapped back to the data scale.

    The training data are rank-transformed to standard normal scores, the
    autocovariance is estimated, and the best linear predictor of order
    ``n`` and its MSPE come from the same Toeplitz solve used for extremes.
    Intervals ``z_hat +/- z_{(1+level)/2} sqrt(MSPE)`` are computed for each
    test position with a full window and mapped back through the empirical
    training quantile function.
    """
    tr = check_series_array(train, name="train")
    te = check_series_array(test, name="test")
    n = check_count(n, "n")
    check_probability(level, "level")
    if n >= tr.size:
        raise ArgumentError("n must be smaller than the training length")
    if te.size <= n:
        raise ArgumentError("test series shorter than the prediction window")
    srt = np.sort(tr)
    z_tr = _normal_scores(srt, tr)
    mu = z_tr.mean()
    zc = z_tr - mu
    acvf = np.array([zc[:zc.size - h] @ zc[h:] for h in range(n + 1)]) / zc.size
    try:
        factor = linalg.cho_factor(linalg.toeplitz(acvf[:n]), lower=True)
    except linalg.LinAlgError as exc:
        from .exceptions import SingularityError
        raise SingularityError(f"autocovariance matrix of order {n} is singular", n=n) from exc
    b = linalg.cho_solve(factor, acvf[1:n + 1])
    mspe = float(acvf[0] - acvf[1:n + 1] @ b)
    z_te = _normal_scores(srt, te) - mu
    z_hat = np.convolve(z_te, b, mode="valid")[:-1] + mu
    half = stats.norm.ppf(0.5 + level / 2.0) * np.sqrt(max(mspe, 0.0))
    return IntervalSet(x_hat=_from_normal(srt, z_hat), lower=_from_normal(srt, z_hat - half),
                       upper=_from_normal(srt, z_hat + half), actual=te[n:],
                       index=np.arange(n, te.size), signed=bool(srt[0] < 0))
