import numpy as np
import pytest

from translinear_ts import ArgumentError, EstimationError, evaluate_coverage, run_lengths, sum_quantiles
from translinear_ts.uncertainty import IntervalSet


def test_alternating_runs():
    x = np.tile([0.0, 1.0], 500)
    r = run_lengths(x, 0.5)
    assert r.mean_run == 1.0 and r.std_err == 0.0 and r.n_runs == 500


def test_iid_runs_geometric():
    x = np.random.default_rng(0).random(100_000)
    assert run_lengths(x, 0.95).mean_run == pytest.approx(1 / 0.95, abs=0.03)


def test_shuffled_runs_approach_geometric():
    from translinear_ts import simulate_logistic_markov
    x = simulate_logistic_markov(0.4, 100_000, seed=0).values
    assert run_lengths(x, 0.95).mean_run > 2.5
    shuffled = np.random.default_rng(1).permutation(x)
    assert run_lengths(shuffled, 0.95).mean_run == pytest.approx(1 / 0.95, abs=0.03)


def test_runs_errors():
    with pytest.raises(EstimationError):
        run_lengths(np.ones(100), 0.9)
    with pytest.raises(ArgumentError):
        run_lengths(np.arange(10.0), 0.3)


def test_window_one_is_marginal_quantile():
    x = np.random.default_rng(3).standard_normal(5000)
    qs = (0.9, 0.99)
    out = sum_quantiles(x, 1, qs)
    np.testing.assert_array_equal([o.value for o in out], np.quantile(x, qs))


def test_sum_quantiles_against_monte_carlo():
    rng = np.random.default_rng(5)
    x = (-np.log(rng.random(100_000))) ** -0.5
    got = sum_quantiles(x, 3, [0.99])[0].value
    big = (-np.log(np.random.default_rng(6).random((10_000_000 // 3, 3)))) ** -0.5
    oracle = np.quantile(big.sum(axis=1), 0.99)
    assert got == pytest.approx(oracle, rel=0.05)


def test_sum_quantiles_monotone_and_seeded():
    x = np.random.default_rng(2).pareto(2.5, 20_000)
    a = sum_quantiles(x, 12, (0.95, 0.98, 0.99), seed=3, n_boot=50)
    b = sum_quantiles(x, 12, (0.95, 0.98, 0.99), seed=3, n_boot=50)
    assert a == b
    assert all(p.value <= q.value for p, q in zip(a, a[1:]))
    assert all(p.std_err > 0 for p in a)


def test_sum_quantiles_window_checks():
    with pytest.raises(ArgumentError):
        sum_quantiles(np.ones(100), 10)
    with pytest.raises(ArgumentError):
        sum_quantiles(np.ones(100), 0)


def test_coverage():
    a = np.array([1.0, 2.0, 3.0])
    assert evaluate_coverage(IntervalSet(a, np.zeros(3), np.full(3, 1e300), actual=a))["coverage"] == 1.0
    res = evaluate_coverage(IntervalSet(a, a + 1, a + 1, actual=a))
    assert res == {"coverage": 0.0, "n": 3}
    with pytest.raises(ArgumentError):
        evaluate_coverage(IntervalSet(a, a, a))
    with pytest.raises(ArgumentError):
        evaluate_coverage(IntervalSet(np.array([]), np.array([]), np.array([]), actual=np.array([])))
