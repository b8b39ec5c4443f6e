"""
Experiment configuration models.

A config is one JSON document with problem, rm, oracle and output blocks.
"""
from __future__ import annotations

import json
from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import config
from .errors import ConfigError


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Pipeline(str, Enum):
    RM = "rm"
    BVP = "bvp"
    SPECTRUM = "spectrum"


class ProblemBlock(_Block):
    mode: Literal["scalar", "path"]
    potential: str = Field(description="quartic, double_well, linear_force or file:<path>")
    potential_params: Dict[str, Any] = Field(default_factory=dict)
    epsilon: float = Field(gt=0, description="temperature")
    n_interior: Optional[int] = Field(default=None, ge=1)
    m_minus: float = 0.0
    m_plus: float = 0.0
    m0: Optional[List[float]] = Field(
        default=None, description="reference mean at all n_interior+2 nodes, boundaries included"
    )

    @model_validator(mode="after")
    def _path_fields(self):
        if self.mode == "path":
            if self.n_interior is None:
                raise ValueError("path problems need n_interior")
            if self.m0 is not None:
                if len(self.m0) != self.n_interior + 2:
                    raise ValueError(f"m0 needs {self.n_interior + 2} values (boundaries included)")
                if self.m0[0] != self.m_minus or self.m0[-1] != self.m_plus:
                    raise ValueError("m0 boundary values must equal m_minus and m_plus")
        elif self.n_interior is not None or self.m0 is not None:
            raise ValueError("scalar problems take no grid or m0")
        return self


class RegionBlock(_Block):
    shape: Literal["interval", "ball"]
    lo: Optional[float] = None
    hi: Optional[float] = None
    radius: Optional[float] = Field(default=None, gt=0)
    growth: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def _shape_fields(self):
        if self.shape == "interval":
            if self.lo is None or self.hi is None:
                raise ValueError("interval regions need lo and hi")
            if not self.lo < self.hi:
                raise ValueError("interval regions need lo < hi")
        elif self.radius is None:
            raise ValueError("ball regions need radius")
        return self


class RestartBlock(_Block):
    kind: Literal["constant", "zero", "front", "random"] = "zero"
    value: Optional[float] = None
    lo: Optional[float] = None
    hi: Optional[float] = None
    radius: Optional[float] = Field(default=None, gt=0)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _kind_fields(self):
        if self.kind == "constant" and self.value is None:
            raise ValueError("constant restarts need value")
        return self


class ScheduleBlock(_Block):
    a0: float = Field(default=1.0, gt=0)
    n0: float = Field(default=10.0, ge=0)
    gamma: float = 1.0

    @field_validator("gamma")
    @classmethod
    def _step_condition(cls, v: float) -> float:
        if not 0.5 < v <= 1.0:
            raise ValueError(
                "gamma must lie in (1/2, 1] so that the steps satisfy sum a_n = inf and sum a_n^2 < inf"
            )
        return v


class TraceBlock(_Block):
    record_every: int = Field(default=1, ge=1)
    state_every: int = Field(default=100, ge=1)
    store_states: bool = True
    kl_every: int = Field(default=0, ge=0)
    kl_samples: int = Field(default=10_000, ge=1)
    kl_seed: int = Field(default=0, ge=0)


class RmBlock(_Block):
    policy: Literal["fixed", "expanding"]
    region: RegionBlock
    restart: RestartBlock = Field(default_factory=RestartBlock)
    x0: Optional[Union[float, List[float]]] = Field(
        default=None, description="initial state; the restart point for sigma=0 when omitted"
    )
    schedule: ScheduleBlock = Field(default_factory=ScheduleBlock)
    n_iters: int = Field(ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)
    sigma_cap: int = Field(default=config.DEFAULT_SIGMA_CAP, ge=1)
    trace: TraceBlock = Field(default_factory=TraceBlock)


class OracleBlock(_Block):
    bvp_tol: float = Field(default=config.DEFAULT_BVP_TOL, gt=0)
    bvp_max_iters: int = Field(default=config.DEFAULT_BVP_MAX_ITERS, ge=1)
    init: Literal["front", "zero", "bump"] = Field(
        default="front", description="front | zero | bump (front plus amplitude sin(pi t))"
    )
    bump_amplitude: float = 0.5
    spectrum_k: int = Field(default=10, ge=1)
    spectrum_at: str = Field(default="bvp", description="bvp | zero | quadratic | file:<path csv>")


class CompareBlock(_Block):
    tol_h1: float = Field(default=0.5, gt=0)
    tol_l2: Optional[float] = Field(default=None, gt=0)
    sigma_factor: float = Field(default=2.0, ge=1)


class OutputBlock(_Block):
    directory: Optional[str] = None
    formats: List[Literal["trace", "path", "spectrum", "summary"]] = Field(
        default_factory=lambda: ["trace", "path", "spectrum", "summary"]
    )


class ExperimentConfig(_Block):
    name: str = "experiment"
    description: str = ""
    pipeline: List[Pipeline] = Field(default_factory=lambda: [Pipeline.RM])
    problem: ProblemBlock
    rm: Optional[RmBlock] = None
    oracle: OracleBlock = Field(default_factory=OracleBlock)
    compare: CompareBlock = Field(default_factory=CompareBlock)
    output: OutputBlock = Field(default_factory=OutputBlock)

    @model_validator(mode="after")
    def _consistency(self):
        if Pipeline.RM in self.pipeline and self.rm is None:
            raise ValueError("the rm pipeline needs an rm block")
        path = self.problem.mode == "path"
        if (Pipeline.BVP in self.pipeline or Pipeline.SPECTRUM in self.pipeline) and not path:
            raise ValueError("bvp and spectrum pipelines need a path problem")
        if self.rm is not None:
            self._check_rm(path)
        if path and self.oracle.spectrum_k > self.problem.n_interior:
            raise ValueError("oracle.spectrum_k exceeds n_interior")
        return self

    def _check_rm(self, path: bool) -> None:
        region, restart = self.rm.region, self.rm.restart
        if path != (region.shape == "ball"):
            raise ValueError("scalar problems use interval regions, path problems use ball regions")
        if path and restart.kind == "constant":
            raise ValueError("path restarts are 'zero', 'front' or 'random'")
        if not path and restart.kind == "front":
            raise ValueError("front restarts need a path problem")
        if restart.kind == "random":
            if path and restart.radius is None:
                raise ValueError("random path restarts need radius")
            if not path and (restart.lo is None or restart.hi is None):
                raise ValueError("random scalar restarts need lo and hi")
        if isinstance(self.rm.x0, float) and region.shape == "interval":
            if not region.lo < self.rm.x0 < region.hi:
                raise ValueError("rm.x0 must lie inside the first trust region U0")
        # restart points must lie in U0
        if region.shape == "interval":
            if restart.kind == "random":
                inside = region.lo <= restart.lo < restart.hi <= region.hi
            else:
                value = restart.value if restart.kind == "constant" else 0.0
                inside = region.lo < value < region.hi
        else:
            # a front restart is checked against the ball once the grid is known
            inside = restart.kind in ("zero", "front") or restart.radius <= region.radius
        if not inside:
            raise ValueError("restart point must lie inside the first trust region U0")

    def with_overrides(self, **changes) -> "ExperimentConfig":
        """Copy with nested overrides, e.g. {'rm.seed': 3, 'problem.n_interior': 99}."""
        data = self.model_dump(mode="json")
        for dotted, value in changes.items():
            target = data
            *parents, leaf = dotted.split(".")
            for key in parents:
                target = target[key]
            target[leaf] = value
        return ExperimentConfig.model_validate(data)


def format_validation_error(err: ValidationError) -> List[str]:
    lines = []
    for item in err.errors():
        loc = ".".join(str(p) for p in item["loc"]) or "<root>"
        lines.append(f"{loc}: {item['msg']}")
    return lines


def parse_config(data: Dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        details = format_validation_error(e)
        raise ConfigError("invalid experiment config", details) from e


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON in {path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    return parse_config(data)
