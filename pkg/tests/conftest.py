import numpy as np
import pytest

from translinear_ts import MaModel, ma_tpdf


def ulp_distance(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.abs(a - b) / np.spacing(np.maximum(np.abs(a), np.abs(b)))


def random_ma(rng, q_max=5, lo=0.0, hi=0.9):
    q = int(rng.integers(1, q_max + 1))
    return MaModel(theta=tuple(rng.uniform(lo, hi, q)), noise_scale=1.0)


def invertible(model):
    # roots of 1 + theta_1 z + ... + theta_q z^q outside the unit disc
    roots = np.roots(model.psi[::-1])
    return bool(np.all(np.abs(roots) > 1.0 + 1e-3))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def ma1_tpdf():
    return ma_tpdf(MaModel(theta=(0.5,), noise_scale=1.0), max_lag=5)


_REPORT = []


@pytest.fixture
def report():
    """Record one pass/fail line per acceptance criterion; printed at session end."""
    def _record(criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        _REPORT.append(line)
        print(line)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance criteria")
        for line in _REPORT:
            terminalreporter.write_line(line)
