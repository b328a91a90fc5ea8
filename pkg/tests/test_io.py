import numpy as np
import pytest

from translinear_ts import DataIOError, Series, Tpdf
from translinear_ts.io import (read_json, read_series, read_table, read_tpdf, write_json,
                               write_series, write_table, write_tpdf)


def test_series_round_trip_exact(tmp_path):
    v = np.random.default_rng(0).standard_normal(1000) * 1e5
    p = write_series(tmp_path / "s.csv", Series(v))
    back = read_series(p)
    assert back.values.tobytes() == v.tobytes()
    raw = p.read_bytes()
    assert b"\r\n" not in raw
    assert raw.startswith(b"t,value\n")


def test_seventeen_digits(tmp_path):
    p = write_table(tmp_path / "t.csv", {"x": [0.1]})
    assert p.read_text().splitlines()[1] == "0.10000000000000001"


def test_tpdf_round_trip(tmp_path):
    tp = Tpdf(sigma=[1.0, 0.3, 0.1], n_pairs_used=[10, 5, 5])
    back = read_tpdf(write_tpdf(tmp_path / "tp.csv", tp))
    np.testing.assert_array_equal(back.sigma, tp.sigma)
    np.testing.assert_array_equal(back.n_pairs_used, [10, 5, 5])


def test_single_column_file(tmp_path):
    (tmp_path / "w.csv").write_text("speed\n1.5\n2.5\n")
    np.testing.assert_array_equal(read_series(tmp_path / "w.csv").values, [1.5, 2.5])


def test_io_errors(tmp_path):
    with pytest.raises(DataIOError):
        read_table(tmp_path / "missing.csv")
    (tmp_path / "bad.csv").write_text("value\nabc\n")
    with pytest.raises(DataIOError):
        read_series(tmp_path / "bad.csv")
    (tmp_path / "gap.csv").write_text("lag,sigma\n0,1\n2,0.5\n")
    with pytest.raises(DataIOError):
        read_tpdf(tmp_path / "gap.csv")
    (tmp_path / "x.json").write_text("{not json")
    with pytest.raises(DataIOError):
        read_json(tmp_path / "x.json")


def test_json_sorted_and_numpy(tmp_path):
    p = write_json(tmp_path / "a.json", {"b": np.float64(1.5), "a": np.arange(2)})
    assert read_json(p) == {"a": [0, 1], "b": 1.5}
    assert p.read_text().index('"a"') < p.read_text().index('"b"')
