"""Command-line interface.

Every subcommand reads flat files, writes flat files and is a pure function
of its inputs, flags and ``--seed``. Exit codes: 0 success, 2 bad arguments
or input values, 3 estimation or numerical failure, 4 file I/O problems.

``--config FILE`` supplies option defaults as a JSON object keyed by option
name (``max_lag`` or ``max-lag``); flags given on the command line win and
unknown keys are rejected. For ``pipeline`` the file is an experiment
config instead.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import DEFAULT_QUANTILES, evaluate_coverage, run_lengths, sum_quantiles
from .exceptions import ArgumentError, DataIOError, EstimationError, TranslinearError
from .innovations import (direct_predictor_weights, fit_ma, innovations_algorithm, ma_tpdf,
                          one_step_predict, rolling_predict)
from .io import read_json, read_series, read_tpdf, write_json, write_series, write_table, write_tpdf
from .pipeline import PRESETS, PipelineError, load_config, preset_config, run_pipeline
from .simulators import MaModel, simulate_garch11, simulate_logistic_markov, simulate_ma
from .tail_estimation import (MarginalFit, back_transform, chi_estimator, estimate_tpdf,
                              fit_marginal, marginal_transform, preprocess)
from .uncertainty import (angular_density, angular_measure, conditional_intervals,
                          cp_decompose_many, gaussian_baseline, joint_region, prediction_tpdm,
                          region_coverage)
from .series import Series

EXIT_OK = 0
EXIT_ARGUMENT = 2
EXIT_ESTIMATION = 3
EXIT_IO = 4

log = logging.getLogger("translinear_ts")

SIM_PARAMS = {
    "ma": {"theta", "noise_scale"},
    "garch": {"alpha0", "alpha1", "beta1", "burn_in"},
    "logistic": {"beta", "rtol"},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ArgumentError(message)


def _global_flags(p, suppress=False):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=d if suppress else 0, help="RNG seed (default 0)")
    p.add_argument("--out-dir", default=d if suppress else ".",
                   help="directory for outputs; relative --out paths land here")
    p.add_argument("--config", default=d, help="JSON file of option defaults")
    p.add_argument("-v", "--verbose", action="count", default=d if suppress else 0)


def _out(args, default_name):
    path = Path(args.out) if getattr(args, "out", None) else Path(default_name)
    return path if path.is_absolute() else Path(args.out_dir) / path


def _sidecar(path):
    return Path(path).with_suffix(".json")


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise ArgumentError(f"{args.command}: missing required option(s) {flags}")


def _parse_params(text):
    if text is None:
        return {}
    p = Path(text)
    doc = read_json(p) if p.suffix == ".json" or p.is_file() else None
    if doc is None:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ArgumentError(f"--params is neither a JSON file nor a JSON object: {exc}") from exc
    if not isinstance(doc, dict):
        raise ArgumentError("--params must be a JSON object")
    return doc


def _load_model(path):
    doc = read_json(path)
    if "theta" not in doc:
        raise DataIOError(f"{path} has no 'theta' field")
    return MaModel(theta=tuple(doc["theta"]), noise_scale=doc.get("noise_scale", 1.0))


def cmd_simulate(args):
    _require(args, "model", "n")
    params = _parse_params(args.params)
    unknown = set(params) - SIM_PARAMS[args.model]
    if unknown:
        raise ArgumentError(f"unknown parameter(s) for {args.model}: {sorted(unknown)}")
    if args.model == "ma":
        s = simulate_ma(MaModel(theta=tuple(params.get("theta", ())),
                                noise_scale=params.get("noise_scale", 1.0)), args.n, seed=args.seed)
    elif args.model == "garch":
        s = simulate_garch11(params.get("alpha0", 0.2), params.get("alpha1", 0.5),
                             params.get("beta1", 0.3), args.n, seed=args.seed,
                             burn_in=params.get("burn_in", 1000))
    else:
        s = simulate_logistic_markov(params.get("beta", 0.4), args.n, seed=args.seed,
                                     rtol=params.get("rtol", 1e-10))
    return [write_series(_out(args, "simulated.csv"), s)]


def cmd_fit_marginal(args):
    _require(args, "input")
    x = read_series(args.input).values
    if args.negative == "clip":
        x = np.maximum(x, 0.0)
    fit = fit_marginal(x, args.quantile)
    return [write_json(_out(args, "marginal.json"), fit.to_dict())]


def cmd_transform(args):
    _require(args, "input", "marginal")
    fit = MarginalFit.from_dict(read_json(args.marginal))
    if args.inverse:
        out = back_transform(read_series(args.input, scale_tag="frechet2_unit"), fit)
    else:
        out = marginal_transform(read_series(args.input), fit, negative=args.negative)
    return [write_series(_out(args, "transformed.csv"), out)]


def cmd_preprocess(args):
    _require(args, "input")
    out = preprocess(read_series(args.input, scale_tag="frechet2_unit"))
    return [write_series(_out(args, "preprocessed.csv"), out)]


def cmd_tpdf(args):
    _require(args, "input")
    tp = estimate_tpdf(read_series(args.input, scale_tag="preprocessed"), args.max_lag,
                       args.radial_quantile)
    return [write_tpdf(_out(args, "tpdf.csv"), tp)]


def cmd_fit_ma(args):
    _require(args, "tpdf")
    st = innovations_algorithm(read_tpdf(args.tpdf), args.n_max)
    model = fit_ma(st, args.trunc_eps, args.q_max, conv_tol=args.conv_tol,
                   conv_rows=args.conv_rows)
    doc = {**model.to_dict(), "nu_trace": st.nu, "last_row_delta": st.last_row_delta(q=args.q_max)}
    return [write_json(_out(args, "model.json"), doc)]


def _predictor_tpdf(args, train=None):
    if args.tpdf is not None and args.model is not None:
        raise ArgumentError("give either --tpdf or --model, not both")
    if args.tpdf is not None:
        return read_tpdf(args.tpdf)
    if args.model is not None:
        return ma_tpdf(_load_model(args.model), max_lag=args.window)
    if train is None:
        raise ArgumentError(f"{args.command}: need --tpdf or --model")
    return estimate_tpdf(preprocess(Series(train, scale_tag="frechet2_unit")), args.window,
                         args.radial_quantile)


def cmd_predict(args):
    _require(args, "input")
    x = read_series(args.input, scale_tag="frechet2_unit").values
    w = direct_predictor_weights(_predictor_tpdf(args), args.window)
    x_hat = rolling_predict(x, w, floor=args.floor)
    nxt = one_step_predict(x[-args.window:], w, floor=args.floor)
    # the last row is the forecast of the first unobserved value
    idx = np.arange(args.window, x.size + 1)
    return [write_table(_out(args, "predictions.csv"), {
        "index": idx, "x_hat": np.append(x_hat, nxt), "actual": np.append(x[args.window:], np.nan)})]


def cmd_intervals(args):
    _require(args, "input")
    x = read_series(args.input, scale_tag="frechet2_unit").values
    if not 0 <= args.test_start < x.size - args.window:
        raise ArgumentError(f"--test-start {args.test_start} leaves no test data "
                            f"(series length {x.size}, window {args.window})")
    train, test = x[:args.test_start], x[args.test_start:]
    tp = _predictor_tpdf(args, train if train.size else None)
    w = direct_predictor_weights(tp, args.window)
    A = prediction_tpdm(tp, args.window)
    H = angular_measure(cp_decompose_many(A, args.n_decomp, args.q_star, seed=args.seed))
    region = joint_region(H, args.level)
    h = angular_density(H)
    x_hat = rolling_predict(test, w)
    actual = test[args.window:]
    idx = np.arange(args.window, test.size) + args.test_start
    large = x_hat > np.quantile(x_hat, args.large_quantile)
    ivs = conditional_intervals(x_hat, h, args.level, actual=actual, index=idx)
    covered = (ivs.lower <= actual) & (actual <= ivs.upper)
    out = _out(args, "intervals.csv")
    write_table(out, {"index": idx, "x_hat": x_hat, "lower": ivs.lower, "upper": ivs.upper,
                      "actual": actual, "large": large.astype(int), "covered": covered.astype(int)})
    reg_cov, n_reg = region_coverage(x_hat, actual, region, args.large_quantile)
    side = {"level": args.level, "window": args.window, "test_start": args.test_start,
            "coverage": float(covered[large].mean()), "n_large": int(large.sum()),
            "joint_region": {"angle_low": region[0], "angle_high": region[1],
                             "coverage": reg_cov, "n_large": n_reg},
            "tpdm": A.m, "bandwidth": h.bandwidth,
            "point_masses": [{"angle": a, "w1": p[0], "w2": p[1], "mass": m}
                             for a, p, m in zip(H.angles, H.points, H.masses)]}
    return [out, write_json(_sidecar(out), side)]


def cmd_diagnose(args):
    _require(args, "input")
    series = {"original": read_series(args.input)}
    if args.fitted:
        series["fitted"] = read_series(args.fitted)
    rl = {"series": [], "quantile": [], "mean_run": [], "std_err": [], "n_runs": []}
    sq = {"series": [], "window": [], "quantile": [], "value": [], "std_err": []}
    chi = {}
    for label, s in series.items():
        for q in args.quantiles:
            r = run_lengths(s, q)
            for k, v in zip(rl, (label, r.quantile, r.mean_run, r.std_err, r.n_runs)):
                rl[k].append(v)
        for r in sum_quantiles(s, args.window, args.quantiles, seed=args.seed, n_boot=args.n_boot):
            for k, v in zip(sq, (label, r.window, r.quantile, r.value, r.std_err)):
                sq[k].append(v)
        chi[label] = chi_estimator(s, args.chi_lag, args.chi_quantile)
    out_dir = Path(args.out_dir)
    return [write_table(out_dir / "run_lengths.csv", rl),
            write_table(out_dir / "sum_quantiles.csv", sq),
            write_json(out_dir / "diagnostics.json",
                       {"chi": chi, "chi_lag": args.chi_lag, "chi_quantile": args.chi_quantile})]


def cmd_baseline_gaussian(args):
    _require(args, "input")
    x = read_series(args.input).values
    if not 0 < args.test_start < x.size - args.window:
        raise ArgumentError(f"--test-start {args.test_start} is outside the series")
    g = gaussian_baseline(x[:args.test_start], x[args.test_start:], args.window, args.level)
    covered = (g.lower <= g.actual) & (g.actual <= g.upper)
    out = _out(args, "baseline_gaussian.csv")
    write_table(out, {"index": g.index + args.test_start, "x_hat": g.x_hat, "lower": g.lower,
                      "upper": g.upper, "actual": g.actual, "covered": covered.astype(int)})
    side = {"level": args.level, "window": args.window, "test_start": args.test_start,
            **evaluate_coverage(g)}
    return [out, write_json(_sidecar(out), side)]


def cmd_pipeline(args):
    if args.config and args.preset:
        raise ArgumentError("give either --config or --preset, not both")
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = preset_config(args.preset)
    else:
        raise ArgumentError("pipeline needs --config or --preset")
    if args.seed_override is not None:
        cfg = cfg.model_copy(update={"seeds": cfg.seeds.model_copy(update={"data": args.seed_override})})
    out_dir = Path(args.out_dir)
    run_pipeline(cfg, out_dir)
    return [out_dir / "summary.json", out_dir / "manifest.json"]


def build_parser():
    parser = _Parser(prog="translinear", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=True)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(func=func)
        return p

    p = add("simulate", cmd_simulate, "simulate an MA, GARCH(1,1) or logistic Markov series")
    p.add_argument("--model", choices=sorted(SIM_PARAMS))
    p.add_argument("--params", help="JSON object or JSON file with model parameters")
    p.add_argument("--n", type=int)
    p.add_argument("--out")

    p = add("fit-marginal", cmd_fit_marginal, "Hill tail index and scale")
    p.add_argument("--in", dest="input")
    p.add_argument("--quantile", type=float, default=0.99)
    p.add_argument("--negative", choices=("raise", "clip"), default="raise")
    p.add_argument("--out")

    p = add("transform", cmd_transform, "marginal transform to tail index 2 (or back)")
    p.add_argument("--in", dest="input")
    p.add_argument("--marginal", help="JSON written by fit-marginal")
    p.add_argument("--inverse", action="store_true")
    p.add_argument("--negative", choices=("raise", "clip"), default="raise")
    p.add_argument("--out")

    p = add("preprocess", cmd_preprocess, "subtract the mean and clamp at zero")
    p.add_argument("--in", dest="input")
    p.add_argument("--out")

    p = add("tpdf", cmd_tpdf, "estimate the tail pairwise dependence function")
    p.add_argument("--in", dest="input")
    p.add_argument("--max-lag", type=int, default=500)
    p.add_argument("--radial-quantile", type=float, default=0.99)
    p.add_argument("--out")

    p = add("fit-ma", cmd_fit_ma, "innovations algorithm and MA(q) fit")
    p.add_argument("--tpdf")
    p.add_argument("--n-max", type=int, default=500)
    p.add_argument("--trunc-eps", type=float, default=1e-3)
    p.add_argument("--q-max", type=int, default=25)
    p.add_argument("--conv-tol", type=float, default=1e-6)
    p.add_argument("--conv-rows", type=int, default=10)
    p.add_argument("--out")

    p = add("predict", cmd_predict, "one-step predictions from the last WINDOW values")
    p.add_argument("--in", dest="input")
    p.add_argument("--model")
    p.add_argument("--tpdf")
    p.add_argument("--window", type=int, default=40)
    p.add_argument("--floor", type=float, default=1e-10)
    p.add_argument("--out")

    p = add("intervals", cmd_intervals, "joint region and conditional prediction intervals")
    p.add_argument("--in", dest="input")
    p.add_argument("--model")
    p.add_argument("--tpdf")
    p.add_argument("--window", type=int, default=30)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--q-star", type=int, default=5)
    p.add_argument("--n-decomp", type=int, default=100)
    p.add_argument("--test-start", type=int, default=70_000)
    p.add_argument("--large-quantile", type=float, default=0.95)
    p.add_argument("--radial-quantile", type=float, default=0.99)
    p.add_argument("--out")

    p = add("diagnose", cmd_diagnose, "run lengths, sum quantiles and chi")
    p.add_argument("--in", dest="input")
    p.add_argument("--fitted", help="series simulated from the fitted model")
    p.add_argument("--quantiles", type=float, nargs="+", default=list(DEFAULT_QUANTILES))
    p.add_argument("--window", type=int, default=12)
    p.add_argument("--chi-lag", type=int, default=1)
    p.add_argument("--chi-quantile", type=float, default=0.95)
    p.add_argument("--n-boot", type=int, default=500)

    p = add("baseline-gaussian", cmd_baseline_gaussian, "Gaussian prediction intervals on normal scores")
    p.add_argument("--in", dest="input")
    p.add_argument("--window", type=int, default=30)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--test-start", type=int, default=70_000)
    p.add_argument("--out")

    p = add("pipeline", cmd_pipeline, "run a full experiment from a config or preset")
    p.add_argument("--preset", choices=sorted(PRESETS))
    return parser


def _apply_config(parser, argv):
    args = parser.parse_args(argv)
    if args.command == "pipeline" or not args.config:
        return args
    doc = read_json(args.config)
    if not isinstance(doc, dict):
        raise ArgumentError("--config must hold a JSON object")
    doc = {k.replace("-", "_"): v for k, v in doc.items() if k != "schema_version"}
    known = set(vars(args)) - {"func", "command", "config"}
    unknown = set(doc) - known
    if unknown:
        raise ArgumentError(f"unknown config key(s) for {args.command}: {sorted(unknown)}")
    for k, v in doc.items():
        # command-line flags win over config values
        if not _given(argv, k):
            setattr(args, k, v)
    return args


def _given(argv, dest):
    flag = "--" + dest.replace("_", "-")
    if dest == "input":
        flag = "--in"
    return any(a == flag or a.startswith(flag + "=") for a in argv)


def _exit_code(exc):
    if isinstance(exc, PipelineError):
        return _exit_code(exc.cause)
    if isinstance(exc, (DataIOError, OSError)):
        return EXIT_IO
    if isinstance(exc, (EstimationError, np.linalg.LinAlgError, FloatingPointError)):
        return EXIT_ESTIMATION
    if isinstance(exc, (ArgumentError, TranslinearError, ValueError)):
        return EXIT_ARGUMENT
    return None


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if args.command == "pipeline":
            args.seed_override = args.seed if _given(argv, "seed") else None
        logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose or 0, 2),
                            format="%(levelname)s %(name)s: %(message)s")
        for path in args.func(args):
            print(path)
    except SystemExit as exc:
        return int(exc.code or 0)
    except Exception as exc:
        code = _exit_code(exc)
        if code is None:
            raise
        print(f"translinear: error: {exc}", file=sys.stderr)
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
