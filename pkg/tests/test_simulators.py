import numpy as np
import pytest
from scipy import stats

from translinear_ts import (ArgumentError, MaModel, estimate_tpdf, frechet_noise, ma_tpdf,
                            preprocess, simulate_garch11, simulate_logistic_markov, simulate_ma)
from translinear_ts.simulators import logistic_conditional_cdf


def test_frechet_noise_inverse_cdf():
    z = frechet_noise(50_000, scale=2.0, seed=1).values
    ks = stats.kstest(z, lambda t: np.exp(-(2.0 / t) ** 2))
    assert ks.pvalue > 0.01


def test_frechet_determinism_and_tag():
    a = frechet_noise(100, seed=5)
    b = frechet_noise(100, seed=5)
    assert a.values.tobytes() == b.values.tobytes()
    assert a.scale_tag == "frechet2_unit"
    assert not np.array_equal(a.values, frechet_noise(100, seed=6).values)


def test_ma_zero_order_is_noise():
    x = simulate_ma(MaModel(theta=(), noise_scale=1.5), 1000, seed=3).values
    z = frechet_noise(1000, scale=1.5, seed=3).values
    np.testing.assert_allclose(x, z, rtol=1e-14)


def test_ma_is_transformed_linear_filter():
    from translinear_ts import t_combine
    m = MaModel(theta=(0.7, 0.2))
    x = simulate_ma(m, 50, seed=9).values
    z = frechet_noise(52, seed=9).values
    # x_t = z_t (+) 0.7 (.) z_{t-1} (+) 0.2 (.) z_{t-2}
    for t in range(50):
        assert x[t] == pytest.approx(t_combine([1.0, 0.7, 0.2], z[[t + 2, t + 1, t]]), rel=1e-13)


def _unit_ma(theta):
    psi = np.r_[1.0, theta]
    return MaModel(theta=theta, noise_scale=1.0 / np.sqrt(psi @ psi))


def test_ma_tpdf_matches_where_dependent():
    m = _unit_ma((0.8, 0.5, 0.2))
    est = estimate_tpdf(preprocess(simulate_ma(m, 100_000, seed=11)), 5, 0.99)
    exact = ma_tpdf(m, max_lag=5)
    assert exact.sigma[0] == pytest.approx(1.0)
    np.testing.assert_allclose(est.sigma[:4], exact.sigma[:4], atol=0.05)


@pytest.mark.parametrize("n,tol", [(100_000, 0.05), (1_000_000, 0.02)])
def test_ma_tpdf_consistency(n, tol):
    # max over h <= q + 2 at the default radial quantile 0.99
    m = _unit_ma((0.8, 0.5, 0.2))
    est = estimate_tpdf(preprocess(simulate_ma(m, n, seed=11)), 5, 0.99)
    assert np.max(np.abs(est.sigma - ma_tpdf(m, max_lag=5).sigma)) < tol


def test_ma_rejects_negative_coefficients():
    with pytest.raises(ArgumentError):
        MaModel(theta=(0.5, -0.1))


def test_ma_model_dict_round_trip():
    m = MaModel(theta=(0.1, 0.2), noise_scale=0.7)
    assert MaModel.from_dict(m.to_dict()) == m


def test_garch_stationary_and_burn_in_independent():
    a = simulate_garch11(0.2, 0.5, 0.3, 40_000, seed=1, burn_in=1000).values
    b = simulate_garch11(0.2, 0.5, 0.3, 40_000, seed=2, burn_in=5000).values
    # thin to weaken serial dependence before the two-sample test
    assert stats.ks_2samp(a[::10], b[::10]).pvalue > 0.01
    # E eps^2 = alpha0 / (1 - alpha1 - beta1)
    assert np.mean(a ** 2) == pytest.approx(1.0, rel=0.15)


def test_garch_rejects_nonstationary():
    with pytest.raises(ArgumentError):
        simulate_garch11(0.2, 0.6, 0.5, 100)


def test_logistic_conditional_cdf_matches_numerical_derivative():
    beta, x = 0.4, 2.0

    def F(u, v):
        return np.exp(-(u ** (-1 / beta) + v ** (-1 / beta)) ** beta)

    h = 1e-6
    fx = np.exp(-1 / x) / x ** 2
    for y in (0.3, 1.0, 2.0, 5.0, 40.0):
        dF = (F(x + h, y) - F(x - h, y)) / (2 * h)
        assert logistic_conditional_cdf(y, x, beta) == pytest.approx(dF / fx, rel=1e-6)


def test_logistic_margins_and_joint_cdf():
    beta = 0.4
    x = simulate_logistic_markov(beta, 100_000, seed=4).values
    assert stats.kstest(x[::7], lambda t: np.exp(-1 / t)).pvalue > 0.01
    a, b = x[:-1], x[1:]
    grid = [0.5, 1.0, 2.0, 5.0, 20.0]
    for u in grid:
        for v in grid:
            emp = np.mean((a <= u) & (b <= v))
            exact = np.exp(-(u ** (-1 / beta) + v ** (-1 / beta)) ** beta)
            assert abs(emp - exact) <= 0.01


def test_logistic_independent_case():
    x = simulate_logistic_markov(1.0, 20_000, seed=0).values
    assert abs(stats.spearmanr(x[:-1], x[1:]).statistic) < 0.03


def test_logistic_determinism_and_range():
    a = simulate_logistic_markov(0.4, 500, seed=8)
    b = simulate_logistic_markov(0.4, 500, seed=8)
    assert a.values.tobytes() == b.values.tobytes()
    with pytest.raises(ArgumentError):
        simulate_logistic_markov(1.5, 10)
