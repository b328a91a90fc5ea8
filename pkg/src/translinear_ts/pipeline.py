"""End-to-end experiment runner.

One :class:`ExperimentConfig` describes a complete run: where the data
comes from, how the margins are fitted, how the TPDF and the MA model are
estimated, which diagnostics are computed and, optionally, the prediction
interval study. :func:`run_pipeline` writes every intermediate artifact to
a directory together with ``manifest.json`` (config, seeds, SHA-256 of each
file) and ``summary.json``. Nothing in the manifest depends on wall-clock
time, so a rerun reproduces it byte for byte.
"""

import logging
from pathlib import Path
from typing import Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import __version__
from .diagnostics import DEFAULT_QUANTILES, evaluate_coverage, run_lengths, sum_quantiles
from .exceptions import ArgumentError, DataIOError, SingularityError, TranslinearError
from .innovations import direct_predictor_weights, fit_ma, innovations_algorithm, rolling_predict
from .io import file_sha256, read_json, read_series, write_json, write_series, write_table, write_tpdf
from .simulators import simulate_garch11, simulate_logistic_markov, simulate_ma
from .tail_estimation import (MarginalFit, back_transform, chi_estimator, estimate_tpdf,
                              fit_marginal, marginal_transform, preprocess)
from .uncertainty import (angular_density, angular_measure, conditional_intervals,
                          cp_decompose_many, gaussian_baseline, joint_region, prediction_tpdm,
                          region_coverage)

__all__ = ["ExperimentConfig", "run_pipeline", "load_config", "preset_config", "PRESETS",
           "PipelineError", "SCHEMA_VERSION"]

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GarchSource(_Strict):
    kind: Literal["garch"] = "garch"
    alpha0: float = 0.2
    alpha1: float = 0.5
    beta1: float = 0.3
    n: int = Field(100_000, ge=1)


class LogisticSource(_Strict):
    kind: Literal["logistic"] = "logistic"
    beta: float = Field(0.4, gt=0, le=1)
    n: int = Field(100_000, ge=1)


class CsvSource(_Strict):
    kind: Literal["csv"] = "csv"
    path: str
    column: str = "value"

    @field_validator("path")
    @classmethod
    def _exists(cls, v):
        if not Path(v).is_file():
            raise ValueError(f"data file {v!r} does not exist")
        return v


class MarginalConfig(_Strict):
    method: Literal["hill", "fixed"] = "hill"
    threshold_quantile: float = Field(0.99, gt=0, lt=1)
    alpha: float | None = Field(None, gt=0)
    c: float | None = Field(None, gt=0)
    negative: Literal["raise", "clip"] = "raise"

    @model_validator(mode="after")
    def _fixed_needs_params(self):
        if self.method == "fixed" and (self.alpha is None or self.c is None):
            raise ValueError("method 'fixed' needs alpha and c")
        return self


class TpdfConfig(_Strict):
    max_lag: int = Field(500, ge=1)
    radial_quantile: float = Field(0.99, gt=0, lt=1)


class InnovationsConfig(_Strict):
    n_max: int = Field(500, ge=12)
    trunc_eps: float = Field(1e-3, gt=0)
    q_max: int = Field(25, ge=1)
    conv_tol: float = Field(1e-2, gt=0)
    conv_rows: int = Field(10, ge=1)
    on_singular: Literal["error", "halve"] = "halve"


class DiagnosticsConfig(_Strict):
    quantiles: tuple[float, ...] = DEFAULT_QUANTILES
    sum_window: int = Field(12, ge=1)
    compare_lags: int = Field(25, ge=1)
    chi_lag: int = Field(1, ge=1)
    chi_quantile: float = Field(0.95, ge=0.8, lt=1)
    n_boot: int = Field(500, ge=2)


class IntervalsConfig(_Strict):
    train_size: int = Field(70_000, ge=1)
    window: int = Field(30, ge=1)
    level: float = Field(0.95, gt=0, lt=1)
    q_star: int = Field(5, ge=2)
    n_decomp: int = Field(100, ge=1)
    large_quantile: float = Field(0.95, gt=0, lt=1)
    baseline: bool = True


class Seeds(_Strict):
    data: int = 0
    fitted: int = 1
    cp: int = 0
    bootstrap: int = 0


class ExperimentConfig(_Strict):
    """Complete, serialisable description of one pipeline run."""

    schema_version: Literal[1] = SCHEMA_VERSION
    name: str = "experiment"
    source: Union[GarchSource, LogisticSource, CsvSource] = Field(discriminator="kind")
    seeds: Seeds = Seeds()
    marginal: MarginalConfig = MarginalConfig()
    tpdf: TpdfConfig = TpdfConfig()
    innovations: InnovationsConfig = InnovationsConfig()
    diagnostics: DiagnosticsConfig = DiagnosticsConfig()
    intervals: IntervalsConfig | None = None

    def to_dict(self):
        return self.model_dump(mode="json")


PRESETS = {
    "garch": {
        "name": "garch",
        "source": {"kind": "garch", "alpha0": 0.2, "alpha1": 0.5, "beta1": 0.3, "n": 100_000},
        "marginal": {"method": "hill", "threshold_quantile": 0.99},
        "innovations": {"q_max": 25},
        "diagnostics": {"compare_lags": 25},
    },
    "logistic": {
        "name": "logistic",
        "source": {"kind": "logistic", "beta": 0.4, "n": 100_000},
        # unit-Frechet margins: the square-root map
        "marginal": {"method": "fixed", "alpha": 1.0, "c": 1.0},
        "innovations": {"q_max": 30},
        "diagnostics": {"compare_lags": 30},
        "intervals": {"train_size": 70_000, "window": 30},
    },
}


class PipelineError(TranslinearError):
    """A stage failed; ``stage`` names it and ``__cause__`` holds the original error."""

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


def preset_config(name, **overrides):
    if name not in PRESETS:
        raise ArgumentError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return ExperimentConfig.model_validate({**PRESETS[name], **overrides})


def load_config(source):
    """Validate a config from a dict or a JSON file path.

    Unknown keys and a missing or wrong ``schema_version`` are rejected.
    """
    data = read_json(source) if isinstance(source, (str, Path)) else source
    if not isinstance(data, dict) or "schema_version" not in data:
        raise ArgumentError("config must be a JSON object with a schema_version field")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ArgumentError(f"invalid config: {exc}") from exc


def _load_source(src, seed):
    if src.kind == "garch":
        return simulate_garch11(src.alpha0, src.alpha1, src.beta1, src.n, seed=seed)
    if src.kind == "logistic":
        return simulate_logistic_markov(src.beta, src.n, seed=seed)
    return read_series(src.path, column=src.column)


def _fit_marginal(series, cfg):
    if cfg.method == "fixed":
        return MarginalFit.fixed(cfg.alpha, cfg.c)
    x = np.maximum(series.values, 0.0) if cfg.negative == "clip" else series.values
    return fit_marginal(x, cfg.threshold_quantile)


def _run_innovations(tpdf, cfg):
    """Innovations to ``n_max``; on singularity at ``n*`` optionally retry at ``n* // 2``."""
    n_max = cfg.n_max
    try:
        return innovations_algorithm(tpdf, n_max), None
    except SingularityError as exc:
        if cfg.on_singular != "halve" or exc.n is None or exc.n // 2 < cfg.conv_rows + 1:
            raise
        reduced = exc.n // 2
        log.warning("innovations singular at n=%d; rerunning with n_max=%d", exc.n, reduced)
        return innovations_algorithm(tpdf, reduced), int(exc.n)


def _mean_se(d):
    return float(d.mean()), float(d.std(ddof=1) / np.sqrt(d.size)) if d.size > 1 else 0.0


class _Run:
    def __init__(self, out_dir, config):
        self.out = Path(out_dir)
        self.config = config
        self.files = {}
        self.stages = []

    def path(self, name):
        return self.out / name

    def record(self, name, path):
        self.files[name] = Path(path).name

    def manifest(self, failed=None):
        m = {
            "package_version": __version__,
            "schema_version": SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "seeds": self.config.seeds.model_dump(),
            "stages": list(self.stages),
            "files": {k: {"path": v, "sha256": file_sha256(self.out / v)}
                      for k, v in sorted(self.files.items())},
        }
        if failed is not None:
            m["failed"] = failed
        return m


def run_pipeline(config, out_dir):
    """Run every stage of ``config`` and write artifacts into ``out_dir``.

    Returns the summary dict (also written as ``summary.json``).

    Raises
    ------
    PipelineError
        Wrapping the first stage failure; the manifest written before
        re-raising records the stage, the error and the files produced so far.
    """
    if not isinstance(config, ExperimentConfig):
        config = load_config(config)
    run = _Run(out_dir, config)
    run.out.mkdir(parents=True, exist_ok=True)
    summary = {"name": config.name}
    state = {}

    def stage(name, fn):
        try:
            fn()
        except Exception as exc:
            failed = {"stage": name, "error": f"{type(exc).__name__}: {exc}"}
            write_json(run.path("manifest.json"), run.manifest(failed=failed))
            if isinstance(exc, (DataIOError, OSError)):
                raise
            raise PipelineError(name, exc) from exc
        run.stages.append(name)

    def load():
        s = _load_source(config.source, config.seeds.data)
        state["original"] = s
        run.record("original", write_series(run.path("original.csv"), s))
        summary["n"] = len(s)

    def marginal():
        fit = _fit_marginal(state["original"], config.marginal)
        state["fit"] = fit
        run.record("marginal", write_json(run.path("marginal.json"), fit.to_dict()))
        summary["marginal"] = fit.to_dict()

    def transform():
        x = marginal_transform(state["original"], state["fit"], negative=config.marginal.negative)
        state["transformed"] = x
        state["preprocessed"] = preprocess(x)
        run.record("transformed", write_series(run.path("transformed.csv"), x))
        run.record("preprocessed", write_series(run.path("preprocessed.csv"), state["preprocessed"]))

    def tpdf():
        tp = estimate_tpdf(state["preprocessed"], config.tpdf.max_lag, config.tpdf.radial_quantile)
        state["tpdf"] = tp
        run.record("tpdf", write_tpdf(run.path("tpdf.csv"), tp))
        summary["tpdf_clamped"] = tp.n_clamped

    def fit_model():
        ic = config.innovations
        st, singular_at = _run_innovations(state["tpdf"], ic)
        model = fit_ma(st, ic.trunc_eps, ic.q_max, conv_tol=ic.conv_tol, conv_rows=ic.conv_rows)
        state["model"] = model
        doc = {**model.to_dict(), "nu_trace": st.nu, "n_max": st.n_max,
               "last_row_delta": st.last_row_delta(q=ic.q_max), "singular_at": singular_at}
        run.record("model", write_json(run.path("model.json"), doc))
        summary["innovations"] = {"nu_final": float(st.nu[-1]), "n_max": st.n_max,
                                  "singular_at": singular_at, "order": model.order,
                                  "noise_scale": model.noise_scale}

    def simulate_fitted():
        sim = simulate_ma(state["model"], len(state["original"]), seed=config.seeds.fitted)
        back = back_transform(sim, state["fit"])
        state["fitted"] = back
        run.record("fitted", write_series(run.path("fitted_original.csv"), back))

    def compare():
        L = config.diagnostics.compare_lags
        refit = preprocess(marginal_transform(state["fitted"], state["fit"]))
        tp_fit = estimate_tpdf(refit, L, config.tpdf.radial_quantile)
        lags = np.arange(1, L + 1)
        orig = state["tpdf"].at(lags)
        diff = orig - tp_fit.sigma[1:]
        mean, se = _mean_se(diff)
        run.record("tpdf_comparison", write_table(run.path("tpdf_comparison.csv"), {
            "lag": lags, "original": orig, "fitted": tp_fit.sigma[1:], "difference": diff}))
        summary["tpdf_difference"] = {"lags": L, "mean": mean, "se": se}

    def diagnose():
        dc = config.diagnostics
        rows = {"series": [], "quantile": [], "mean_run": [], "std_err": [], "n_runs": []}
        srows = {"series": [], "window": [], "quantile": [], "value": [], "std_err": []}
        out = {}
        for label in ("original", "fitted"):
            x = state[label]
            rl = [run_lengths(x, q) for q in dc.quantiles]
            sq = sum_quantiles(x, dc.sum_window, dc.quantiles, seed=config.seeds.bootstrap,
                               n_boot=dc.n_boot)
            for r in rl:
                rows["series"].append(label)
                rows["quantile"].append(r.quantile)
                rows["mean_run"].append(r.mean_run)
                rows["std_err"].append(r.std_err)
                rows["n_runs"].append(r.n_runs)
            for r in sq:
                srows["series"].append(label)
                srows["window"].append(r.window)
                srows["quantile"].append(r.quantile)
                srows["value"].append(r.value)
                srows["std_err"].append(r.std_err)
            out[label] = {
                "chi": chi_estimator(x, dc.chi_lag, dc.chi_quantile),
                "run_lengths": {f"{r.quantile:g}": [r.mean_run, r.std_err] for r in rl},
                "sum_quantiles": {f"{r.quantile:g}": [r.value, r.std_err] for r in sq},
            }
        run.record("run_lengths", write_table(run.path("run_lengths.csv"), rows))
        run.record("sum_quantiles", write_table(run.path("sum_quantiles.csv"), srows))
        summary["diagnostics"] = out

    def intervals():
        ic = config.intervals
        x = state["transformed"].values
        if ic.train_size + ic.window >= x.size:
            raise ArgumentError(f"train_size={ic.train_size} leaves no test data")
        train, test = x[:ic.train_size], x[ic.train_size:]
        tp = estimate_tpdf(preprocess(train), ic.window, config.tpdf.radial_quantile)
        w = direct_predictor_weights(tp, ic.window)
        A = prediction_tpdm(tp, ic.window)
        H = angular_measure(cp_decompose_many(A, ic.n_decomp, ic.q_star, seed=config.seeds.cp))
        region = joint_region(H, ic.level)
        h = angular_density(H)
        x_hat = rolling_predict(test, w)
        actual = test[ic.window:]
        idx = np.arange(ic.window, test.size) + ic.train_size
        large = x_hat > np.quantile(x_hat, ic.large_quantile)
        ivs = conditional_intervals(x_hat, h, ic.level, actual=actual, index=idx)
        hit = (ivs.lower <= actual) & (actual <= ivs.upper)
        reg_cov, n_reg = region_coverage(x_hat, actual, region, ic.large_quantile)
        cond = evaluate_coverage(type(ivs)(x_hat=ivs.x_hat[large], lower=ivs.lower[large],
                                           upper=ivs.upper[large], actual=actual[large]))
        run.record("intervals", write_table(run.path("intervals.csv"), {
            "index": idx, "x_hat": x_hat, "lower": ivs.lower, "upper": ivs.upper,
            "actual": actual, "large": large.astype(int), "covered": hit.astype(int)}))
        run.record("angular_measure", write_table(run.path("angular_measure.csv"), {
            "angle": H.angles, "w1": H.points[:, 0], "w2": H.points[:, 1], "mass": H.masses}))
        res = {"tpdm": A.m, "weights_nu": w.nu, "joint_region": list(region),
               "joint_region_coverage": reg_cov, "joint_region_n": n_reg,
               "conditional_coverage": cond["coverage"], "conditional_n": cond["n"],
               "bandwidth": h.bandwidth, "n_point_masses": len(H)}
        if ic.baseline:
            orig = state["original"].values
            g = gaussian_baseline(orig[:ic.train_size], orig[ic.train_size:], ic.window, ic.level)
            ghit = (g.lower <= g.actual) & (g.actual <= g.upper)
            run.record("baseline", write_table(run.path("baseline_gaussian.csv"), {
                "index": g.index + ic.train_size, "x_hat": g.x_hat, "lower": g.lower,
                "upper": g.upper, "actual": g.actual, "covered": ghit.astype(int)}))
            res["baseline_coverage_all"] = float(ghit.mean())
            res["baseline_coverage_large"] = float(ghit[large].mean())
        summary["intervals"] = res

    stages = [("load", load), ("fit-marginal", marginal), ("transform", transform),
              ("tpdf", tpdf), ("fit-ma", fit_model), ("simulate-fitted", simulate_fitted),
              ("compare-tpdf", compare), ("diagnose", diagnose)]
    if config.intervals is not None:
        stages.append(("intervals", intervals))
    for name, fn in stages:
        log.info("stage %s", name)
        stage(name, fn)

    run.record("summary", write_json(run.path("summary.json"), summary))
    write_json(run.path("manifest.json"), run.manifest())
    return summary
