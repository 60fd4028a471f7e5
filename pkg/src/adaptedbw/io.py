"""JSON process / AR(1) formats and CSV matrix writers.

Process JSON::

    {"d": 1, "T": 2, "mean": [0, 0], "L": [[1, 0], [0.5, 1]]}

``L`` is row-major ``dT x dT`` with zero upper blocks. AR(1) JSON::

    {"alphas": [0, 0.5], "sigmas": [1, 1]}
"""

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import AdaptedBWError
from .process import AR1Spec, GaussianProcess, LowerBlockFactor


class FormatError(AdaptedBWError):
    """Malformed input file; the message names the offending field."""


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(f"{where}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise FormatError(f"{where}: value {value!r} is not finite")
    return float(value)


def _positive_int(obj, key):
    if key not in obj:
        raise FormatError(f"missing field '{key}'")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise FormatError(f"field '{key}': expected a positive integer, got {v!r}")
    return v


def _vector(obj, key, length):
    if key not in obj:
        raise FormatError(f"missing field '{key}'")
    v = obj[key]
    if not isinstance(v, list):
        raise FormatError(f"field '{key}': expected a list")
    if length is not None and len(v) != length:
        raise FormatError(f"field '{key}': expected {length} entries, got {len(v)}")
    return [_number(x, f"field '{key}' index {i}") for i, x in enumerate(v)]


def process_from_dict(obj):
    if not isinstance(obj, dict):
        raise FormatError("process JSON must be an object")
    d = _positive_int(obj, "d")
    T = _positive_int(obj, "T")
    n = d * T
    mean = _vector(obj, "mean", n) if "mean" in obj else [0.0] * n
    if "L" not in obj:
        raise FormatError("missing field 'L'")
    rows = obj["L"]
    if not isinstance(rows, list) or len(rows) != n:
        raise FormatError(f"field 'L': expected {n} rows (d*T)")
    L = np.zeros((n, n))
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise FormatError(f"field 'L' row {r}: expected {n} entries")
        for c, x in enumerate(row):
            L[r, c] = _number(x, f"field 'L' row {r} column {c}")
            if c // d > r // d and L[r, c] != 0.0:
                raise FormatError(
                    f"field 'L' row {r} column {c}: upper block entries must be 0"
                )
    return GaussianProcess(np.array(mean), LowerBlockFactor(L, d))


def process_to_dict(process):
    return {
        "d": int(process.d),
        "T": int(process.T),
        "mean": [float(x) for x in process.mean],
        "L": [[float(x) for x in row] for row in process.factor.matrix],
    }


def ar1_from_dict(obj):
    if not isinstance(obj, dict):
        raise FormatError("AR(1) JSON must be an object")
    alphas = _vector(obj, "alphas", None)
    sigmas = _vector(obj, "sigmas", len(alphas))
    for i, s in enumerate(sigmas):
        if not s > 0:
            raise FormatError(f"field 'sigmas' index {i}: volatility {s} must be > 0")
    return AR1Spec(tuple(alphas), tuple(sigmas))


def _load_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def load_process(path):
    try:
        return process_from_dict(_load_json(path))
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None


def load_ar1(path):
    try:
        return ar1_from_dict(_load_json(path))
    except FormatError as exc:
        raise FormatError(f"{path}: {exc}") from None


def dumps(obj):
    return json.dumps(obj, indent=2) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj), encoding="utf-8")


def _fmt(x):
    return repr(float(x))


def write_matrix_csv(path, A):
    """One matrix per file; header row holds 1-based column indices."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([str(j + 1) for j in range(A.shape[1])])
        for row in A:
            w.writerow([_fmt(x) for x in row])


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return _fmt(x)
    return str(x)


def write_table(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(x) for x in row])


def write_table_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_table(fh, header, rows)


def read_matrix_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return np.array([[float(x) for x in row] for row in rows[1:]])


def path_header(d, T):
    if d == 1:
        return ["path_id"] + [f"t{t}" for t in range(1, T + 1)]
    return ["path_id"] + [f"t{t}_{k}" for t in range(1, T + 1) for k in range(1, d + 1)]
