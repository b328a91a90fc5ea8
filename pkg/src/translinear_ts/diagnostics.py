"""Tail summaries used to compare a series with data simulated from its fitted model."""

from dataclasses import dataclass

import numpy as np

from .exceptions import ArgumentError, EstimationError
from .validation import as_generator, check_count, check_probability, check_series_array

__all__ = [
    "RunLengthSummary",
    "SumQuantileSummary",
    "run_lengths",
    "sum_quantiles",
    "evaluate_coverage",
    "DEFAULT_QUANTILES",
]

DEFAULT_QUANTILES = (0.95, 0.98, 0.99, 0.995, 0.999)
BOOTSTRAP_RESAMPLES = 500
BLOCK_FACTOR = 10


@dataclass(frozen=True)
class RunLengthSummary:
    quantile: float
    mean_run: float
    std_err: float
    n_runs: int


@dataclass(frozen=True)
class SumQuantileSummary:
    window: int
    quantile: float
    value: float
    std_err: float


def _runs(mask):
    edges = np.diff(np.concatenate(([0], mask.astype(np.int8), [0])))
    return np.flatnonzero(edges == -1) - np.flatnonzero(edges == 1)


def run_lengths(data, quantile):
    """Mean length of maximal runs strictly above the empirical ``quantile``.

    The standard error is the sample standard deviation of the run lengths
    over ``sqrt(n_runs)`` (zero when there is a single run).
    """
    x = check_series_array(data, name="data")
    check_probability(quantile, "quantile", 0.5, 1.0, closed_low=True)
    runs = _runs(x > np.quantile(x, quantile))
    if runs.size == 0:
        raise EstimationError(f"no exceedances of the {quantile} quantile")
    se = float(runs.std(ddof=1) / np.sqrt(runs.size)) if runs.size > 1 else 0.0
    return RunLengthSummary(quantile=float(quantile), mean_run=float(runs.mean()),
                            std_err=se, n_runs=int(runs.size))


def sum_quantiles(data, window, quantiles=DEFAULT_QUANTILES, *, seed=0,
                  n_boot=BOOTSTRAP_RESAMPLES, block=None):
    """Empirical quantiles of sums of ``window`` consecutive values.

    Standard errors come from a nonoverlapping block bootstrap: the series
    is cut into blocks of ``block`` values (default ``10 * window``), blocks
    are drawn with replacement, and only sums lying inside one block enter
    each resample, so no sum straddles two unrelated blocks.
    """
    x = check_series_array(data, name="data")
    window = check_count(window, "window")
    if window >= x.size / 10:
        raise ArgumentError(f"window={window} must be below length/10 = {x.size / 10:g}")
    qs = np.atleast_1d(np.asarray(quantiles, dtype=np.float64))
    for q in qs:
        check_probability(float(q), "quantile")
    n_boot = check_count(n_boot, "n_boot")
    block = BLOCK_FACTOR * window if block is None else check_count(block, "block")
    if block < window:
        raise ArgumentError("block must be at least as long as window")

    kernel = np.ones(window)
    values = np.quantile(np.convolve(x, kernel, mode="valid"), qs)

    n_blocks = x.size // block
    if n_blocks < 2:
        raise ArgumentError(f"series too short for blocks of {block}")
    blocks = x[:n_blocks * block].reshape(n_blocks, block)
    # rolling sums inside each block via cumulative sums along the row
    cs = np.concatenate((np.zeros((n_blocks, 1)), np.cumsum(blocks, axis=1)), axis=1)
    inner = cs[:, window:] - cs[:, :-window]
    rng = as_generator(seed)
    boot = np.empty((n_boot, qs.size))
    for i in range(n_boot):
        pick = rng.integers(0, n_blocks, n_blocks)
        boot[i] = np.quantile(inner[pick].ravel(), qs)
    se = boot.std(axis=0, ddof=1)
    return [SumQuantileSummary(window=window, quantile=float(q), value=float(v), std_err=float(s))
            for q, v, s in zip(qs, values, se)]


def evaluate_coverage(intervals):
    """Share of rows with ``lower <= actual <= upper``, as ``{"coverage", "n"}``."""
    if intervals.actual is None:
        raise ArgumentError("intervals carry no actual values")
    n = len(intervals)
    if n == 0:
        raise ArgumentError("interval set is empty")
    a = intervals.actual
    hit = (intervals.lower <= a) & (a <= intervals.upper)
    return {"coverage": float(hit.mean()), "n": int(n)}
