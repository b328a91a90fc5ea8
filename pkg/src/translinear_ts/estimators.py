"""scikit-learn style wrappers around the functional API.

Inputs follow the sklearn convention of ``X`` with shape ``(n_samples,)``
or ``(n_samples, 1)``; rows are consecutive time points.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .diagnostics import evaluate_coverage
from .innovations import (direct_predictor_weights, fit_ma, innovations_algorithm,
                          innovations_predict, rolling_predict)
from .series import Series
from .simulators import simulate_ma
from .tail_estimation import (MarginalFit, back_transform, estimate_tpdf, fit_marginal,
                              marginal_transform, preprocess)
from .uncertainty import (angular_density, angular_measure, conditional_intervals,
                          cp_decompose_many, joint_region, prediction_tpdm)
from .validation import check_series_array

__all__ = ["FrechetMarginalTransformer", "TransLinearMA", "ExtremePredictionIntervals"]


def _reshape_like(X, values):
    X = np.asarray(X)
    return values.reshape(-1, 1) if X.ndim == 2 else values


class FrechetMarginalTransformer(TransformerMixin, BaseEstimator):
    """Map data to tail index 2 and unit scale, optionally preprocessing afterwards.

    Parameters
    ----------
    threshold_quantile : float
        Hill threshold as an empirical quantile.
    alpha, c : float or None
        When both are given the marginal is fixed instead of fitted.
    negative : {"raise", "clip"}
        Handling of negative observations.
    preprocess : bool
        Subtract the transformed mean and clamp at zero after transforming.
        Such output cannot be inverted exactly.
    """

    def __init__(self, threshold_quantile=0.99, alpha=None, c=None, negative="raise",
                 preprocess=False):
        self.threshold_quantile = threshold_quantile
        self.alpha = alpha
        self.c = c
        self.negative = negative
        self.preprocess = preprocess

    def fit(self, X, y=None):
        x = check_series_array(X, name="X")
        if self.alpha is not None and self.c is not None:
            self.marginal_ = MarginalFit.fixed(self.alpha, self.c)
        else:
            xs = np.maximum(x, 0.0) if self.negative == "clip" else x
            self.marginal_ = fit_marginal(xs, self.threshold_quantile)
        self.alpha_ = self.marginal_.alpha_hat
        self.c_ = self.marginal_.c_hat
        return self

    def transform(self, X):
        check_is_fitted(self, "marginal_")
        x = check_series_array(X, name="X")
        out = marginal_transform(x, self.marginal_, negative=self.negative)
        if self.preprocess:
            out = preprocess(out)
        return _reshape_like(X, out.values.copy())

    def inverse_transform(self, X):
        check_is_fitted(self, "marginal_")
        x = check_series_array(X, name="X", nonnegative=True)
        out = back_transform(Series(x, scale_tag="frechet2_unit"), self.marginal_)
        return _reshape_like(X, out.values.copy())


class TransLinearMA(BaseEstimator):
    """Fit a transformed-linear MA(q) to preprocessed data via the innovations algorithm.

    Attributes
    ----------
    tpdf_ : Tpdf
    state_ : InnovationsState
    model_ : MaModel
    """

    def __init__(self, max_lag=500, radial_quantile=0.99, n_max=500, trunc_eps=1e-3, q_max=25,
                 conv_tol=1e-6, conv_rows=10):
        self.max_lag = max_lag
        self.radial_quantile = radial_quantile
        self.n_max = n_max
        self.trunc_eps = trunc_eps
        self.q_max = q_max
        self.conv_tol = conv_tol
        self.conv_rows = conv_rows

    def fit(self, X, y=None):
        x = check_series_array(X, name="X", nonnegative=True)
        self.tpdf_ = estimate_tpdf(x, self.max_lag, self.radial_quantile)
        self.state_ = innovations_algorithm(self.tpdf_, self.n_max)
        self.model_ = fit_ma(self.state_, self.trunc_eps, self.q_max,
                             conv_tol=self.conv_tol, conv_rows=self.conv_rows)
        return self

    def predict(self, X):
        """In-sample one-step predictions from the innovations form (first value is ``log 2``)."""
        check_is_fitted(self, "state_")
        x = check_series_array(X, name="X", nonnegative=True)
        return _reshape_like(X, innovations_predict(x, self.state_).values.copy())

    def sample(self, n, seed=0):
        check_is_fitted(self, "model_")
        return simulate_ma(self.model_, n, seed=seed).values.copy()


class ExtremePredictionIntervals(BaseEstimator):
    """Projection predictor and angular-measure prediction intervals.

    ``fit`` takes training data on the tail-index-2 scale (not preprocessed;
    preprocessing is applied internally for the TPDF estimate).
    """

    def __init__(self, window=30, level=0.95, q_star=5, n_decomp=100, radial_quantile=0.99,
                 large_quantile=0.95, seed=0):
        self.window = window
        self.level = level
        self.q_star = q_star
        self.n_decomp = n_decomp
        self.radial_quantile = radial_quantile
        self.large_quantile = large_quantile
        self.seed = seed

    def fit(self, X, y=None):
        x = check_series_array(X, name="X", nonnegative=True)
        self.tpdf_ = estimate_tpdf(preprocess(Series(x, scale_tag="frechet2_unit")),
                                   self.window, self.radial_quantile)
        self.weights_ = direct_predictor_weights(self.tpdf_, self.window)
        self.tpdm_ = prediction_tpdm(self.tpdf_, self.window)
        Bs = cp_decompose_many(self.tpdm_, self.n_decomp, self.q_star, seed=self.seed)
        self.angular_measure_ = angular_measure(Bs)
        self.joint_region_ = joint_region(self.angular_measure_, self.level)
        self.density_ = angular_density(self.angular_measure_)
        return self

    def predict(self, X):
        """Predictions of ``X[window:]``, each from the preceding ``window`` values."""
        check_is_fitted(self, "weights_")
        return rolling_predict(check_series_array(X, name="X", nonnegative=True), self.weights_)

    def predict_interval(self, X, large_only=True):
        """Conditional intervals for ``X[window:]``; by default only for large predictions."""
        check_is_fitted(self, "density_")
        x = check_series_array(X, name="X", nonnegative=True)
        x_hat = self.predict(x)
        idx = np.arange(self.window, x.size)
        keep = x_hat > np.quantile(x_hat, self.large_quantile) if large_only else slice(None)
        return conditional_intervals(x_hat[keep], self.density_, self.level,
                                     actual=x[self.window:][keep], index=idx[keep])

    def score(self, X, y=None):
        """Coverage of the large-prediction intervals on ``X``."""
        return evaluate_coverage(self.predict_interval(X))["coverage"]
