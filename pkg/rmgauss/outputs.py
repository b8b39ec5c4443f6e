"""
Output files: trace, path and spectrum CSVs plus a run-summary JSON.

All files are UTF-8 with LF line endings; floats carry 17 significant digits.
"""
from __future__ import annotations

import csv
import json
import math
import os
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

from . import config

TRACE_HEADER = ["n", "sigma", "a", "truncated", "norm_x", "kl_estimate"]
PATH_HEADER = ["t", "x", "m0", "mean"]
SPECTRUM_HEADER = ["index", "eigenvalue"]

TRACE_FILE = "trace.csv"
PATH_FILE = "path.csv"
BVP_PATH_FILE = "bvp_path.csv"
SPECTRUM_FILE = "spectrum.csv"
SUMMARY_FILE = "summary.json"


def fmt(value: Optional[float]) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return config.CSV_FLOAT_FORMAT % value


def _write_rows(path: str, header: List[str], rows: Iterable[List[str]]) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_trace_csv(path: str, rows: Iterable[Dict[str, Any]]) -> str:
    return _write_rows(path, TRACE_HEADER, (
        [
            str(r["n"]),
            str(r["sigma"]),
            fmt(r["a"]),
            "1" if r["truncated"] else "0",
            fmt(r["norm_x"]),
            fmt(r["kl_estimate"]),
        ]
        for r in rows
    ))


def write_path_csv(path: str, x_with_boundary: np.ndarray, m0_with_boundary: np.ndarray) -> str:
    """t, x, m0, mean = x + m0 at every node including t = 0 and t = 1."""
    t = np.linspace(0.0, 1.0, len(x_with_boundary))
    mean = x_with_boundary + m0_with_boundary
    return _write_rows(path, PATH_HEADER, (
        [fmt(t[i]), fmt(x_with_boundary[i]), fmt(m0_with_boundary[i]), fmt(mean[i])]
        for i in range(len(t))
    ))


def write_spectrum_csv(path: str, eigenvalues: np.ndarray) -> str:
    return _write_rows(path, SPECTRUM_HEADER, (
        [str(i + 1), fmt(float(lam))] for i, lam in enumerate(eigenvalues)
    ))


def write_summary_json(path: str, summary: Dict[str, Any]) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(summary, f, indent=2, sort_keys=True, default=_json_default)
        f.write("\n")
    return path


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def read_path_csv(path: str) -> Dict[str, np.ndarray]:
    columns: Dict[str, List[float]] = {name: [] for name in PATH_HEADER}
    with open(path, "r", encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            for name in PATH_HEADER:
                columns[name].append(float(row[name]))
    return {name: np.asarray(values) for name, values in columns.items()}


def read_trace_csv(path: str) -> Dict[str, np.ndarray]:
    columns: Dict[str, List[float]] = {name: [] for name in TRACE_HEADER}
    with open(path, "r", encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            for name in TRACE_HEADER:
                columns[name].append(float(row[name]) if row[name] != "" else math.nan)
    return {name: np.asarray(values) for name, values in columns.items()}


def read_summary_json(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
