import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from translinear_ts import MaModel, simulate_logistic_markov, simulate_ma
from translinear_ts.estimators import ExtremePredictionIntervals, FrechetMarginalTransformer, TransLinearMA


def test_marginal_transformer_round_trip():
    x = np.random.default_rng(0).pareto(3.0, 20_000) + 1
    t = FrechetMarginalTransformer(threshold_quantile=0.98).fit(x)
    y = t.transform(x)
    np.testing.assert_allclose(t.inverse_transform(y), x, rtol=1e-10)
    assert t.transform(x.reshape(-1, 1)).shape == (x.size, 1)
    assert t.get_params()["threshold_quantile"] == 0.98
    assert clone(t).get_params() == t.get_params()


def test_marginal_transformer_fixed_and_unfitted():
    t = FrechetMarginalTransformer(alpha=1.0, c=1.0)
    with pytest.raises(NotFittedError):
        t.transform([1.0])
    np.testing.assert_allclose(t.fit_transform([4.0, 9.0]), [2.0, 3.0])


def test_translinear_ma_fit_and_sample():
    theta = (0.6, 0.3)
    psi = np.r_[1.0, theta]
    m = MaModel(theta=theta, noise_scale=1 / np.sqrt(psi @ psi))
    from translinear_ts import preprocess
    x = preprocess(simulate_ma(m, 100_000, seed=0)).values
    est = TransLinearMA(max_lag=100, n_max=100, q_max=5, conv_tol=1e-2).fit(x)
    assert est.model_.order >= 2
    assert est.model_.theta[0] == pytest.approx(0.6, abs=0.15)
    assert est.predict(x[:20]).shape == (20,)
    assert est.sample(50, seed=1).shape == (50,)


def test_interval_estimator():
    x = np.sqrt(simulate_logistic_markov(0.4, 40_000, seed=1).values)
    est = ExtremePredictionIntervals(window=10, n_decomp=20).fit(x[:30_000])
    ivs = est.predict_interval(x[30_000:])
    assert len(ivs) == pytest.approx(0.05 * (10_000 - 10), abs=2)
    assert 0.85 <= est.score(x[30_000:]) <= 1.0
    lo, hi = est.joint_region_
    assert 0 <= lo <= hi <= np.pi / 2
