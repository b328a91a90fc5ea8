import json

import numpy as np
import pytest

from translinear_ts.cli import main
from translinear_ts.io import read_table


def run(*args):
    return main([str(a) for a in args])


@pytest.fixture
def workdir(tmp_path):
    assert run("simulate", "--model", "logistic", "--params", '{"beta": 0.4}', "--n", 20_000,
               "--seed", 3, "--out-dir", tmp_path, "--out", "raw.csv") == 0
    return tmp_path


def test_chain_of_commands(workdir):
    d = workdir
    assert run("fit-marginal", "--in", d / "raw.csv", "--out", d / "m.json") == 0
    assert set(json.loads((d / "m.json").read_text())) >= {"alpha_hat", "c_hat", "threshold", "n_exceed"}
    assert run("transform", "--in", d / "raw.csv", "--marginal", d / "m.json", "--out", d / "tr.csv") == 0
    assert run("transform", "--inverse", "--in", d / "tr.csv", "--marginal", d / "m.json",
               "--out", d / "back.csv") == 0
    np.testing.assert_allclose(read_table(d / "back.csv")["value"], read_table(d / "raw.csv")["value"],
                               rtol=1e-10)
    assert run("preprocess", "--in", d / "tr.csv", "--out", d / "pre.csv") == 0
    assert run("tpdf", "--in", d / "pre.csv", "--max-lag", 100, "--out", d / "tp.csv") == 0
    assert list(read_table(d / "tp.csv")) == ["lag", "sigma", "n_pairs"]
    assert run("fit-ma", "--tpdf", d / "tp.csv", "--n-max", 100, "--q-max", 30, "--conv-tol", 1e-2,
               "--out", d / "model.json") == 0
    model = json.loads((d / "model.json").read_text())
    assert set(model) >= {"theta", "noise_scale", "nu_trace"}
    assert run("predict", "--in", d / "tr.csv", "--model", d / "model.json", "--window", 40,
               "--out", d / "pred.csv") == 0
    pred = read_table(d / "pred.csv")
    assert pred["index"][-1] == 20_000 and np.isnan(pred["actual"][-1])
    assert run("intervals", "--in", d / "tr.csv", "--tpdf", d / "tp.csv", "--window", 10,
               "--n-decomp", 10, "--test-start", 14_000, "--out", d / "iv.csv") == 0
    side = json.loads((d / "iv.json").read_text())
    assert {"coverage", "joint_region", "point_masses"} <= set(side)
    assert run("diagnose", "--in", d / "raw.csv", "--n-boot", 10, "--out-dir", d / "diag") == 0
    assert (d / "diag" / "run_lengths.csv").exists()
    assert run("baseline-gaussian", "--in", d / "raw.csv", "--test-start", 14_000,
               "--out", d / "g.csv") == 0


def test_outputs_are_reproducible(tmp_path):
    for name in ("a.csv", "b.csv"):
        assert run("simulate", "--model", "ma", "--params", '{"theta": [0.5]}', "--n", 500,
                   "--seed", 9, "--out", tmp_path / name) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_exit_codes(workdir, capsys):
    d = workdir
    assert run("simulate", "--model", "ma", "--params", '{"bad": 1}', "--n", 5) == 2
    assert run("tpdf", "--in", d / "raw.csv", "--max-lag", "x") == 2
    assert run("tpdf") == 2
    assert run("tpdf", "--in", d / "nope.csv") == 4
    (d / "c.json").write_text('{"max_lag": 50, "typo": 1}')
    assert run("tpdf", "--in", d / "raw.csv", "--config", d / "c.json") == 2
    (d / "flat.csv").write_text("value\n" + "1.0\n" * 200)
    assert run("fit-marginal", "--in", d / "flat.csv") == 3


def test_config_defaults_and_override(workdir):
    d = workdir
    (d / "c.json").write_text('{"max-lag": 20}')
    assert run("tpdf", "--in", d / "raw.csv", "--config", d / "c.json", "--out", d / "t20.csv") == 0
    assert read_table(d / "t20.csv")["lag"].size == 21
    assert run("tpdf", "--in", d / "raw.csv", "--config", d / "c.json", "--max-lag", 30,
               "--out", d / "t30.csv") == 0
    assert read_table(d / "t30.csv")["lag"].size == 31


def test_pipeline_command(tmp_path):
    cfg = {"schema_version": 1, "source": {"kind": "garch", "n": 20_000},
           "tpdf": {"max_lag": 100}, "innovations": {"n_max": 100},
           "diagnostics": {"n_boot": 10}}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    assert run("pipeline", "--config", tmp_path / "cfg.json", "--out-dir", tmp_path / "out") == 0
    assert (tmp_path / "out" / "summary.json").exists()
    (tmp_path / "bad.json").write_text(json.dumps({**cfg, "extra": 1}))
    assert run("pipeline", "--config", tmp_path / "bad.json", "--out-dir", tmp_path / "o2") == 2
    assert run("pipeline", "--out-dir", tmp_path / "o3") == 2
