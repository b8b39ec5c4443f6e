"""
Compare two runs: distances between final mean paths (or scalar final
states) and their truncation counts.
"""
from __future__ import annotations

import logging
import os
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np
from pydantic import ValidationError

from .errors import ConfigError, IncompatibleRunsError
from .function_space import Grid, PathVector, norm_h1, norm_l2
from .models import CompareBlock
from .outputs import BVP_PATH_FILE, PATH_FILE, SUMMARY_FILE, read_path_csv, read_summary_json, write_summary_json

logger = logging.getLogger(__name__)

COMPARE_REPORT_FILE = "compare_report.json"
METADATA_FIELDS = ("mode", "potential", "epsilon", "m_minus", "m_plus")


@dataclass
class LoadedRun:
    source: str
    metadata: Dict[str, Any]
    mean: Optional[np.ndarray] = None  # path mean with boundary values
    final_x: Optional[float] = None
    sigma_total: Optional[int] = None
    # compare block of the recorded config, when the run echoed one
    compare_settings: Optional[CompareBlock] = None

    @property
    def is_path(self) -> bool:
        return self.mean is not None


@dataclass
class CompareReport:
    a: str
    b: str
    mode: str
    h1_distance: float
    l2_distance: float
    n_interior_a: Optional[int]
    n_interior_b: Optional[int]
    sigma_a: Optional[int]
    sigma_b: Optional[int]
    sigma_ratio: Optional[float]
    tol_h1: float
    tol_l2: Optional[float]
    sigma_factor: float
    passed_h1: bool
    passed_l2: bool
    passed_sigma: bool

    @property
    def passed(self) -> bool:
        return self.passed_h1 and self.passed_l2 and self.passed_sigma

    def to_dict(self) -> dict:
        data = asdict(self)
        data["passed"] = self.passed
        return data


def load_run(source: str) -> LoadedRun:
    """
    Load a run from an output directory (path.csv, else bvp_path.csv, plus
    summary.json) or from a path CSV with an optional sibling summary.json.
    """
    if os.path.isdir(source):
        summary_path = os.path.join(source, SUMMARY_FILE)
        csv_path = next(
            (p for p in (os.path.join(source, PATH_FILE), os.path.join(source, BVP_PATH_FILE))
             if os.path.exists(p)),
            None,
        )
    elif os.path.isfile(source):
        summary_path = os.path.join(os.path.dirname(os.path.abspath(source)), SUMMARY_FILE)
        csv_path = source
    else:
        raise ConfigError(f"no run found at {source}")

    summary = read_summary_json(summary_path) if os.path.exists(summary_path) else {}
    metadata = dict(summary.get("problem", {}))
    rm = summary.get("rm") or {}
    run = LoadedRun(source, metadata, sigma_total=rm.get("sigma_total"))
    recorded = (summary.get("config") or {}).get("compare")
    if recorded is not None:
        try:
            run.compare_settings = CompareBlock.model_validate(recorded)
        except ValidationError as e:
            raise ConfigError(f"{summary_path}: bad compare settings: {e}") from e

    if csv_path is not None:
        run.mean = read_path_csv(csv_path)["mean"]
        metadata.setdefault("mode", "path")
        metadata.setdefault("m_minus", float(run.mean[0]))
        metadata.setdefault("m_plus", float(run.mean[-1]))
        metadata["n_interior"] = len(run.mean) - 2
    elif rm.get("final_x") is not None:
        run.final_x = float(rm["final_x"])
    else:
        raise ConfigError(f"{source} holds neither a path CSV nor a scalar final state")
    return run


def check_compatible(a: LoadedRun, b: LoadedRun) -> None:
    for name in METADATA_FIELDS:
        if name in a.metadata and name in b.metadata and a.metadata[name] != b.metadata[name]:
            raise IncompatibleRunsError(name, a.metadata[name], b.metadata[name])
    if a.is_path != b.is_path:
        raise IncompatibleRunsError("mode", "path" if a.is_path else "scalar", "path" if b.is_path else "scalar")


def _on_grid(mean: np.ndarray, grid: Grid) -> np.ndarray:
    source_t = np.linspace(0.0, 1.0, len(mean))
    return np.interp(grid.nodes, source_t, mean)


def path_distances(mean_a: np.ndarray, mean_b: np.ndarray) -> tuple[float, float]:
    """H1 and L2 distances on the finer of the two grids; the coarser path is interpolated linearly."""
    grid = Grid(max(len(mean_a), len(mean_b)) - 2)
    diff = PathVector(_on_grid(mean_a, grid) - _on_grid(mean_b, grid), grid)
    return norm_h1(diff), norm_l2(diff)


def resolve_settings(run: LoadedRun, tol_h1: Optional[float] = None, tol_l2: Optional[float] = None,
                     sigma_factor: Optional[float] = None) -> CompareBlock:
    """Explicit values win, then the compare block recorded with run A, then the defaults."""
    base = run.compare_settings or CompareBlock()
    return CompareBlock(
        tol_h1=base.tol_h1 if tol_h1 is None else tol_h1,
        tol_l2=base.tol_l2 if tol_l2 is None else tol_l2,
        sigma_factor=base.sigma_factor if sigma_factor is None else sigma_factor,
    )


def compare_runs(source_a: str, source_b: str, tol_h1: Optional[float] = None, tol_l2: Optional[float] = None,
                 sigma_factor: Optional[float] = None) -> CompareReport:
    a, b = load_run(source_a), load_run(source_b)
    check_compatible(a, b)
    try:
        settings = resolve_settings(a, tol_h1, tol_l2, sigma_factor)
    except ValidationError as e:
        raise ConfigError(f"bad compare tolerances: {e}") from e
    tol_h1, tol_l2, sigma_factor = settings.tol_h1, settings.tol_l2, settings.sigma_factor

    if a.is_path:
        h1, l2 = path_distances(a.mean, b.mean)
        mode = "path"
    else:
        h1 = l2 = abs(a.final_x - b.final_x)
        mode = "scalar"

    if a.sigma_total is not None and b.sigma_total is not None:
        lo, hi = sorted((a.sigma_total, b.sigma_total))
        sigma_ratio = (hi + 1) / (lo + 1)
        passed_sigma = sigma_ratio <= sigma_factor
    else:
        sigma_ratio, passed_sigma = None, True

    report = CompareReport(
        a=source_a,
        b=source_b,
        mode=mode,
        h1_distance=float(h1),
        l2_distance=float(l2),
        n_interior_a=a.metadata.get("n_interior"),
        n_interior_b=b.metadata.get("n_interior"),
        sigma_a=a.sigma_total,
        sigma_b=b.sigma_total,
        sigma_ratio=sigma_ratio,
        tol_h1=tol_h1,
        tol_l2=tol_l2,
        sigma_factor=sigma_factor,
        passed_h1=bool(h1 <= tol_h1),
        passed_l2=tol_l2 is None or bool(l2 <= tol_l2),
        passed_sigma=passed_sigma,
    )
    logger.info("compare %s vs %s: H1=%.6g L2=%.6g passed=%s", source_a, source_b, h1, l2, report.passed)
    return report


def write_compare_report(path: str, report: CompareReport) -> str:
    return write_summary_json(path, report.to_dict())
