"""
Concurrent sweeps over seeds or grid resolutions.

Each sweep member is an independent experiment run in a worker thread with
its own sampler; results land in run_<k>/ subdirectories.
"""
from __future__ import annotations

import asyncio
import logging
import os
from dataclasses import dataclass
from datetime import datetime
from typing import Dict, List, Optional, Sequence, Tuple

from . import config
from .errors import ConfigError, RmGaussError
from .experiment import ExperimentResult, run_experiment
from .ledger import RunLedger, RunStatus
from .models import ExperimentConfig, Pipeline
from .outputs import write_summary_json

logger = logging.getLogger(__name__)

SWEEP_SUMMARY_FILE = "sweep_summary.json"


@dataclass(frozen=True)
class SweepSpec:
    kind: str  # "seeds" or "grids"
    values: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.values)


def parse_sweep(text: str) -> SweepSpec:
    """Parse 'seeds=K' or 'grids=n1,n2,...'."""
    if "=" not in text:
        raise ConfigError(f"bad sweep {text!r}: expected seeds=K or grids=n1,n2")
    key, value = (part.strip() for part in text.split("=", 1))
    try:
        numbers = tuple(int(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"bad sweep {text!r}: values must be integers") from None

    if key == "seeds":
        if len(numbers) != 1 or numbers[0] < 1:
            raise ConfigError("seeds sweep takes one positive count, e.g. seeds=20")
        return SweepSpec("seeds", tuple(range(numbers[0])))
    if key == "grids":
        if not numbers or min(numbers) < 1:
            raise ConfigError("grids sweep takes positive interior node counts, e.g. grids=99,199")
        return SweepSpec("grids", numbers)
    raise ConfigError(f"unknown sweep kind {key!r} (seeds or grids)")


def member_config(cfg: ExperimentConfig, spec: SweepSpec, index: int) -> ExperimentConfig:
    """Config for sweep member index: seed = master seed + index, or the index-th grid."""
    if spec.kind == "seeds":
        if cfg.rm is None:
            raise ConfigError("a seed sweep needs an rm block")
        return cfg.with_overrides(**{"rm.seed": cfg.rm.seed + index})
    if cfg.problem.mode != "path":
        raise ConfigError("a grid sweep needs a path problem")
    if cfg.problem.m0 is not None:
        raise ConfigError("a grid sweep cannot reuse an explicit m0")
    return cfg.with_overrides(**{"problem.n_interior": spec.values[index]})


class SweepRegistry:
    """Tracks sweep members and their outcomes."""

    def __init__(self, workers: int = config.DEFAULT_SWEEP_WORKERS):
        self.tasks: Dict[int, asyncio.Task] = {}
        self.results: Dict[int, ExperimentResult] = {}
        self.errors: Dict[int, str] = {}
        self.logs: Dict[int, List[str]] = {}
        self._semaphore = asyncio.Semaphore(workers)
        self._lock = asyncio.Lock()

    async def log(self, index: int, msg: str) -> None:
        async with self._lock:
            timestamp = datetime.now().strftime("%H:%M:%S")
            self.logs.setdefault(index, []).append(f"[{timestamp}] {msg}")
        logger.info("run_%d: %s", index, msg)

    async def _run_member(self, index: int, cfg: ExperimentConfig, output_dir: str,
                          pipelines: Optional[Sequence[Pipeline]], spectrum_at: Optional[str],
                          ledger: Optional[RunLedger], command: str) -> None:
        async with self._semaphore:
            await self.log(index, f"started in {output_dir}")
            try:
                result = await asyncio.to_thread(
                    run_experiment, cfg, output_dir, pipelines, spectrum_at, None, ledger, command
                )
            except RmGaussError as e:
                self.errors[index] = str(e)
                self.results[index] = ExperimentResult(
                    e.exit_code, RunStatus.FAILED, output_dir, {"error": str(e)}
                )
                await self.log(index, f"failed: {e}")
                return
            self.results[index] = result
            await self.log(index, f"finished with status {result.status.value}")

    async def run(self, cfg: ExperimentConfig, spec: SweepSpec, output_dir: str,
                  pipelines: Optional[Sequence[Pipeline]] = None, spectrum_at: Optional[str] = None,
                  ledger: Optional[RunLedger] = None, command: str = "run") -> List[ExperimentResult]:
        members = [member_config(cfg, spec, k) for k in range(spec.size)]
        for k, member in enumerate(members):
            run_dir = os.path.join(output_dir, f"run_{k}")
            self.tasks[k] = asyncio.create_task(
                self._run_member(k, member, run_dir, pipelines, spectrum_at, ledger, command)
            )
        await asyncio.gather(*self.tasks.values())
        return [self.results[k] for k in range(spec.size)]


def _member_row(index: int, spec: SweepSpec, cfg: ExperimentConfig, registry: SweepRegistry) -> dict:
    result = registry.results[index]
    summary = result.summary
    rm = summary.get("rm", {})
    bvp = summary.get("bvp", {})
    row = {
        "run": f"run_{index}",
        "status": result.status.value,
        "exit_code": result.exit_code,
        "sigma_total": rm.get("sigma_total"),
        "final_norm": rm.get("final_norm"),
        "final_x": rm.get("final_x"),
        "bvp_converged": bvp.get("converged"),
    }
    if spec.kind == "seeds":
        row["seed"] = cfg.rm.seed + index
    else:
        row["n_interior"] = spec.values[index]
    error = registry.errors.get(index, summary.get("error"))
    if error is not None:
        row["error"] = error
    row["log"] = list(registry.logs.get(index, []))
    return row


def run_sweep(cfg: ExperimentConfig, spec: SweepSpec, output_dir: str,
              pipelines: Optional[Sequence[Pipeline]] = None, spectrum_at: Optional[str] = None,
              ledger: Optional[RunLedger] = None, command: str = "run",
              workers: int = config.DEFAULT_SWEEP_WORKERS) -> Tuple[int, dict]:
    """Run the sweep, write sweep_summary.json and return (exit code, summary)."""

    async def _main() -> SweepRegistry:
        registry = SweepRegistry(workers)
        await registry.run(cfg, spec, output_dir, pipelines, spectrum_at, ledger, command)
        return registry

    os.makedirs(output_dir, exist_ok=True)
    registry = asyncio.run(_main())
    results = [registry.results[k] for k in range(spec.size)]
    rows = [_member_row(k, spec, cfg, registry) for k in range(spec.size)]
    exit_code = max(r.exit_code for r in results)
    summary = {
        "name": cfg.name,
        "command": command,
        "sweep": {"kind": spec.kind, "values": list(spec.values)},
        "runs": rows,
        "exit_code": exit_code,
    }
    write_summary_json(os.path.join(output_dir, SWEEP_SUMMARY_FILE), summary)
    return exit_code, summary
