"""Flat-file persistence.

CSV files are comma separated with a header row, LF line endings and
floats written with 17 significant digits, which round-trips float64
exactly. JSON documents are written with sorted keys so that identical
content hashes identically.
"""

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .exceptions import DataIOError
from .series import Series
from .tail_estimation import Tpdf

__all__ = [
    "write_table",
    "read_table",
    "write_series",
    "read_series",
    "write_tpdf",
    "read_tpdf",
    "write_json",
    "read_json",
    "file_sha256",
]


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_table(path, columns):
    """Write a dict of equal-length columns as CSV."""
    names = list(columns)
    cols = [np.asarray(columns[k]) for k in names]
    n = {c.shape[0] for c in cols}
    if len(n) > 1:
        raise ValueError(f"columns differ in length: {sorted(n)}")
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names)
            for row in zip(*cols):
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc
    return path


def read_table(path, required=()):
    """Read a CSV written by :func:`write_table` into a dict of float arrays.

    Empty cells become NaN.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataIOError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    missing = [c for c in required if c not in header]
    if missing:
        raise DataIOError(f"{path} lacks column(s) {missing}; found {header}")
    body = [r for r in rows[1:] if r]
    out = {}
    for j, name in enumerate(header):
        try:
            out[name] = np.array([float(r[j]) if r[j].strip() else np.nan for r in body])
        except (ValueError, IndexError) as exc:
            raise DataIOError(f"{path}: column {name!r} is not numeric: {exc}") from exc
    return out


def write_series(path, series):
    v = series.values if isinstance(series, Series) else np.asarray(series, dtype=np.float64)
    return write_table(path, {"t": np.arange(v.size), "value": v})


def read_series(path, scale_tag="original", column="value"):
    """Read one column (default ``value``; a single-column file also works)."""
    tab = read_table(path)
    if column not in tab:
        data_cols = [k for k in tab if k != "t"]
        if len(data_cols) != 1:
            raise DataIOError(f"{path}: no {column!r} column and no unique data column")
        column = data_cols[0]
    v = tab[column]
    if np.any(~np.isfinite(v)):
        raise DataIOError(f"{path}: column {column!r} has missing or non-finite values")
    return Series(v, scale_tag=scale_tag, metadata={"path": str(path)})


def write_tpdf(path, tpdf):
    lags = np.arange(tpdf.sigma.size)
    counts = tpdf.n_pairs_used if tpdf.n_pairs_used is not None else np.zeros(lags.size, dtype=int)
    return write_table(path, {"lag": lags, "sigma": tpdf.sigma, "n_pairs": counts})


def read_tpdf(path):
    tab = read_table(path, required=("lag", "sigma"))
    lags = tab["lag"]
    if not np.array_equal(lags, np.arange(lags.size)):
        raise DataIOError(f"{path}: lags must run 0, 1, 2, ... without gaps")
    counts = tab.get("n_pairs")
    return Tpdf(sigma=tab["sigma"],
                n_pairs_used=None if counts is None else counts.astype(np.int64),
                metadata={"path": str(path)})


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path, obj):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=True) + "\n",
                        encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc
    return path


def read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataIOError(f"{path} is not valid JSON: {exc}") from exc


def file_sha256(path):
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
