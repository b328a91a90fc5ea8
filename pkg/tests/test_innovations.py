import numpy as np
import pytest
from scipy import linalg

from translinear_ts import (ArgumentError, ConvergenceError, MaModel, SingularityError, Tpdf, ZERO,
                            direct_predictor_weights, fit_ma, innovations_algorithm,
                            innovations_predict, ma_tpdf, one_step_predict, rolling_predict,
                            simulate_ma, tau_inv)
from conftest import invertible, random_ma


def test_two_by_two_brute_force(ma1_tpdf):
    # sigma = (1.25, 0.5, 0): solve [[1.25, .5], [.5, 1.25]] b = (.5, 0) by hand
    w = direct_predictor_weights(ma1_tpdf, 2)
    np.testing.assert_allclose(w.b, [0.625 / 1.3125, -0.25 / 1.3125], atol=1e-12)
    assert w.b[0] == pytest.approx(0.47619, abs=1e-5)
    assert w.b[1] == pytest.approx(-0.19048, abs=1e-5)
    assert 1.25 - w.nu == pytest.approx(0.238095, abs=1e-6)


def test_recursion_first_steps(ma1_tpdf):
    st = innovations_algorithm(ma1_tpdf, 3)
    assert st.nu[0] == 1.25
    assert st.theta[1, 1] == pytest.approx(0.5 / 1.25)
    assert st.nu[1] == pytest.approx(1.25 - 0.4 ** 2 * 1.25)


def test_recursion_equals_projection(rng):
    for _ in range(20):
        tp = ma_tpdf(random_ma(rng), max_lag=60)
        st = innovations_algorithm(tp, 50)
        for n in range(1, 51):
            w = direct_predictor_weights(tp, n)
            assert abs(st.nu[n] - w.nu) <= 1e-8


def test_nu_monotone(rng):
    for _ in range(20):
        st = innovations_algorithm(ma_tpdf(random_ma(rng), max_lag=60), 100)
        assert np.all(np.diff(st.nu) <= 1e-12)


def test_converges_to_ma_coefficients(rng):
    done = 0
    while done < 10:
        m = random_ma(rng)
        if not invertible(m):
            continue
        st = innovations_algorithm(ma_tpdf(m), 500)
        np.testing.assert_allclose(st.row(500)[:m.order], m.theta, atol=1e-2)
        assert st.nu[500] == pytest.approx(1.0, abs=1e-2)
        done += 1


def test_truncated_tpdf_support(rng):
    m = MaModel(theta=(0.6, 0.3))
    st = innovations_algorithm(ma_tpdf(m), 40)
    for n in range(3, 41):
        assert np.all(np.abs(st.row(n)[2:]) <= 1e-6)


def test_fit_ma_recovers_model():
    m = MaModel(theta=(0.7, 0.4, 0.1), noise_scale=1.3)
    fitted = fit_ma(innovations_algorithm(ma_tpdf(m), 300))
    np.testing.assert_allclose(fitted.theta, m.theta, atol=1e-4)
    assert fitted.noise_scale == pytest.approx(1.3, rel=1e-4)


def test_fit_ma_convergence_error():
    # long-memory TPDF: rows still moving at n = 30
    tp = Tpdf(sigma=(1.0 + np.arange(200)) ** -0.5)
    with pytest.raises(ConvergenceError) as err:
        fit_ma(innovations_algorithm(tp, 30))
    assert err.value.delta > 0


def test_singularity_error():
    # sigma(1) = sigma(0): perfectly dependent neighbours
    with pytest.raises(SingularityError) as err:
        innovations_algorithm(Tpdf(sigma=[1.0, 1.0]), 5)
    assert err.value.n == 1
    with pytest.raises(SingularityError):
        direct_predictor_weights(Tpdf(sigma=[1.0, 1.0]), 3)


def test_predictors_agree_on_tau_inv_scale(rng):
    m = MaModel(theta=(0.5, 0.3))
    tp = ma_tpdf(m, max_lag=30)
    x = simulate_ma(m, 41, seed=3)
    st = innovations_algorithm(tp, 40)
    inno = innovations_predict(x, st).values
    for n in (1, 5, 20, 40):
        w = direct_predictor_weights(tp, n)
        direct = one_step_predict(x.values[:n], w)
        assert abs(tau_inv(direct) - tau_inv(inno[n])) <= 1e-6


def test_rolling_matches_one_step():
    tp = ma_tpdf(MaModel(theta=(0.5,)), max_lag=10)
    x = simulate_ma(MaModel(theta=(0.5,)), 200, seed=1).values
    w = direct_predictor_weights(tp, 10)
    roll = rolling_predict(x, w)
    assert roll.size == 190
    for i in (0, 57, 189):
        assert roll[i] == pytest.approx(one_step_predict(x[i:i + 10], w), rel=1e-12)


def test_innovations_predict_starts_at_zero_element(ma1_tpdf):
    st = innovations_algorithm(ma1_tpdf, 5)
    out = innovations_predict(np.array([1.0, 2.0, 0.5]), st)
    assert out.values[0] == ZERO
    with pytest.raises(ArgumentError):
        innovations_predict(np.ones(10), st)


def test_zero_in_window_uses_floor():
    w = direct_predictor_weights(Tpdf(sigma=[1.0, 0.5]), 1)
    assert one_step_predict([0.0], w) > 0


def test_ma_tpdf_analytic():
    tp = ma_tpdf(MaModel(theta=(0.5, 0.2), noise_scale=2.0))
    np.testing.assert_allclose(tp.sigma, 4 * np.array([1.29, 0.6, 0.2]))
