"""
Experiment pipelines: build the numerical objects from a config, run RM, the
boundary-value oracle and the spectrum, and write the output files.
"""
from __future__ import annotations

import logging
import math
import os
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .errors import ConfigError, DomainError, OracleNotConvergedError, RmGaussError, TruncationStormError
from .function_space import Grid, PathVector, ScalarState, State, resample
from .ledger import EventLevel, RunLedger, RunStatus
from .models import ExperimentConfig, Pipeline
from .objective import Problem, second_moment_bound
from .oracles import BvpSolution, bvp_solve, convexity_check, front_state, schrodinger_eigs
from .outputs import (
    BVP_PATH_FILE,
    PATH_FILE,
    SPECTRUM_FILE,
    SUMMARY_FILE,
    TRACE_FILE,
    read_path_csv,
    write_path_csv,
    write_spectrum_csv,
    write_summary_json,
    write_trace_csv,
)
from .potentials import get_potential
from .rm_engine import (
    PolicyKind,
    RandomRestart,
    RmTrace,
    StepSchedule,
    TraceOptions,
    TrustRegionPolicy,
    constant_restart,
    h1_ball_policy,
    interval_policy,
    rm_run,
)

logger = logging.getLogger(__name__)


@dataclass
class ExperimentResult:
    exit_code: int
    status: RunStatus
    output_dir: str
    summary: Dict[str, Any]
    files: List[str] = field(default_factory=list)


def build_problem(cfg: ExperimentConfig) -> Problem:
    block = cfg.problem
    potential = get_potential(block.potential, block.potential_params)
    try:
        if block.mode == "scalar":
            return Problem.scalar(potential, block.epsilon)
        m0 = None if block.m0 is None else np.asarray(block.m0[1:-1], dtype=float)
        return Problem.path(potential, block.epsilon, Grid(block.n_interior),
                            block.m_minus, block.m_plus, m0)
    except DomainError as e:
        raise ConfigError(f"problem: {e}") from e


def build_schedule(cfg: ExperimentConfig) -> StepSchedule:
    s = cfg.rm.schedule
    try:
        return StepSchedule(s.a0, s.n0, s.gamma)
    except DomainError as e:
        raise ConfigError(f"rm.schedule: {e}") from e


def build_policy(cfg: ExperimentConfig, problem: Problem) -> TrustRegionPolicy:
    rm = cfg.rm
    region, restart = rm.region, rm.restart

    if restart.kind == "random":
        if problem.is_path:
            restart_fn = RandomRestart(restart.seed, grid=problem.grid, radius=restart.radius)
        else:
            restart_fn = RandomRestart(restart.seed, interval=(restart.lo, restart.hi))
    elif restart.kind == "constant":
        restart_fn = constant_restart(ScalarState(restart.value))
    elif restart.kind == "front":
        restart_fn = constant_restart(front_state(problem))
    else:
        restart_fn = constant_restart(problem.zero_state())

    kind = PolicyKind(rm.policy)
    if region.shape == "interval":
        policy = interval_policy(kind, region.lo, region.hi, restart_fn, region.growth)
    else:
        policy = h1_ball_policy(kind, region.radius, restart_fn, region.growth)

    if restart.kind != "random" and not policy.member(policy.restart_point(0), 0):
        raise ConfigError("rm.restart: restart point lies outside the first trust region")
    return policy


def initial_state(cfg: ExperimentConfig, problem: Problem, policy: TrustRegionPolicy) -> State:
    x0 = cfg.rm.x0
    if x0 is None:
        return policy.restart_point(0)
    if problem.is_path:
        if not isinstance(x0, list) or len(x0) != problem.grid.n_interior:
            raise ConfigError(f"rm.x0 must list {problem.grid.n_interior} interior values")
        return PathVector(np.asarray(x0, dtype=float), problem.grid)
    if isinstance(x0, list):
        raise ConfigError("rm.x0 must be a number for scalar problems")
    return ScalarState(x0)


def build_trace_options(cfg: ExperimentConfig) -> TraceOptions:
    t = cfg.rm.trace
    return TraceOptions(t.record_every, t.state_every, t.store_states, t.kl_every, t.kl_samples, t.kl_seed)


def bvp_initial_guess(cfg: ExperimentConfig, problem: Problem) -> PathVector:
    init = cfg.oracle.init
    if init == "zero":
        return PathVector.zeros(problem.grid)
    front = front_state(problem)
    if init == "bump":
        amplitude = cfg.oracle.bump_amplitude
        return front + PathVector.from_function(problem.grid, lambda t: amplitude * np.sin(np.pi * t))
    return front


def quadratic_state(problem: Problem) -> PathVector:
    """x for the mean m(t) = m_minus + (m_plus - m_minus) t^2."""
    t = problem.grid.nodes
    mean = problem.m_minus + (problem.m_plus - problem.m_minus) * t**2
    return PathVector(mean - problem.m0, problem.grid)


def _state_from_file(problem: Problem, path: str) -> PathVector:
    try:
        columns = read_path_csv(path)
    except (OSError, KeyError, ValueError) as e:
        raise ConfigError(f"cannot read path file {path}: {e}") from e
    mean = resample(columns["mean"], problem.grid)
    return PathVector(mean.values - problem.m0, problem.grid)


def _state_summary(x: State) -> Any:
    if isinstance(x, ScalarState):
        return x.value
    return None


class ExperimentRunner:
    """Runs the pipelines of one config into one output directory."""

    def __init__(self, cfg: ExperimentConfig, output_dir: str, ledger: Optional[RunLedger] = None,
                 command: str = "run"):
        self.cfg = cfg
        self.output_dir = output_dir
        self.ledger = ledger
        self.command = command
        self.files: List[str] = []
        self.exit_code = 0
        self.status = RunStatus.COMPLETED
        self.run_id: Optional[int] = None
        self.problem = build_problem(cfg)
        self.summary: Dict[str, Any] = {
            "name": cfg.name,
            "command": command,
            "problem": self.problem.describe(),
            "config": cfg.model_dump(mode="json"),
            "timings": {},
        }
        self._bvp: Optional[BvpSolution] = None

    def _path(self, filename: str) -> str:
        return os.path.join(self.output_dir, filename)

    def _wants(self, fmt: str) -> bool:
        return fmt in self.cfg.output.formats

    def _event(self, level: EventLevel, message: str) -> None:
        if self.ledger is not None and self.run_id is not None:
            self.ledger.add_event(self.run_id, level, message)

    def _fail(self, status: RunStatus, exit_code: int) -> None:
        # keep the most severe outcome
        if exit_code > self.exit_code:
            self.exit_code = exit_code
            self.status = status

    def run_rm(self) -> RmTrace:
        cfg, problem = self.cfg, self.problem
        policy = build_policy(cfg, problem)
        schedule = build_schedule(cfg)
        x0 = initial_state(cfg, problem, policy)
        sampler = problem.new_sampler(cfg.rm.seed)

        started = time.perf_counter()
        try:
            trace = rm_run(problem, policy, schedule, x0, sampler, cfg.rm.n_iters,
                           build_trace_options(cfg), cfg.rm.sigma_cap)
        except TruncationStormError as e:
            logger.error("%s", e)
            self._event(EventLevel.ERROR, str(e))
            trace = e.trace
            self._fail(RunStatus.STORM, e.exit_code)
            self.summary["error"] = str(e)
        self.summary["timings"]["rm"] = time.perf_counter() - started

        rm_summary = trace.summary()
        rm_summary.update(
            seed=cfg.rm.seed,
            policy=policy.description,
            final_x=_state_summary(trace.final_x),
            second_moment_bound_initial=second_moment_bound(problem, x0),
            second_moment_bound_final=(
                second_moment_bound(problem, trace.final_x) if trace.final_x.is_finite() else None
            ),
        )
        self.summary["rm"] = rm_summary

        if self._wants("trace"):
            self.files.append(write_trace_csv(self._path(TRACE_FILE), trace.rows()))
        if problem.is_path and self._wants("path"):
            self.files.append(write_path_csv(
                self._path(PATH_FILE), trace.final_x.with_boundary(), problem.m0_with_boundary()
            ))
        self._event(EventLevel.INFO, f"rm finished: sigma_total={trace.sigma_total}")
        return trace

    def run_bvp(self) -> BvpSolution:
        cfg, problem = self.cfg, self.problem
        started = time.perf_counter()
        solution = bvp_solve(problem, bvp_initial_guess(cfg, problem),
                             cfg.oracle.bvp_tol, cfg.oracle.bvp_max_iters)
        self.summary["timings"]["bvp"] = time.perf_counter() - started
        self._bvp = solution

        self.summary["bvp"] = {
            "converged": solution.converged,
            "newton_iters": solution.newton_iters,
            "residual_h1": solution.residual_h1,
            "final_norm": solution.x_star.norm(),
        }
        if not solution.converged:
            self._fail(RunStatus.NOT_CONVERGED, OracleNotConvergedError.exit_code)
            self._event(EventLevel.WARN, "bvp solve did not converge")
        if self._wants("path"):
            self.files.append(write_path_csv(
                self._path(BVP_PATH_FILE), solution.x_star.with_boundary(), problem.m0_with_boundary()
            ))
        return solution

    def spectrum_state(self, at: str) -> PathVector:
        problem = self.problem
        if at == "bvp":
            solution = self._bvp or self.run_bvp()
            return solution.x_star
        if at == "zero":
            return PathVector.zeros(problem.grid)
        if at == "quadratic":
            return quadratic_state(problem)
        if at.startswith("file:"):
            return _state_from_file(problem, at[len("file:"):])
        raise ConfigError(f"unknown spectrum location {at!r} (bvp, zero, quadratic or file:<path>)")

    def run_spectrum(self, at: Optional[str] = None, k: Optional[int] = None) -> None:
        cfg, problem = self.cfg, self.problem
        at = at or cfg.oracle.spectrum_at
        k = k or cfg.oracle.spectrum_k
        if not 1 <= k <= problem.grid.n_interior:
            raise ConfigError(f"spectrum k must lie in [1, {problem.grid.n_interior}]")
        x = self.spectrum_state(at)

        started = time.perf_counter()
        report = schrodinger_eigs(problem, x, k)
        convexity = convexity_check(problem, x)
        self.summary["timings"]["spectrum"] = time.perf_counter() - started
        self.summary["spectrum"] = {
            "at": at,
            "operator": report.operator_desc,
            "k": k,
            "min_eigenvalue": float(report.eigenvalues[0]),
            "negative_count": int(np.sum(report.eigenvalues < 0)),
            "gershgorin_lower": report.gershgorin_lower,
            "min_q": convexity.min_q,
            "theta_bound": convexity.theta_bound,
            "satisfies_pointwise_bound": convexity.satisfies_pointwise_bound,
            "spectrally_convex": convexity.spectrally_convex,
        }
        if self._wants("spectrum"):
            self.files.append(write_spectrum_csv(self._path(SPECTRUM_FILE), report.eigenvalues))

    def execute(self, pipelines: Sequence[Pipeline], spectrum_at: Optional[str] = None,
                spectrum_k: Optional[int] = None) -> ExperimentResult:
        os.makedirs(self.output_dir, exist_ok=True)
        if self.ledger is not None:
            self.run_id = self.ledger.start_run(
                self.cfg.name, self.command,
                seed=self.cfg.rm.seed if self.cfg.rm else None,
                output_dir=self.output_dir, config=self.summary["config"],
            )

        started = time.perf_counter()
        try:
            for pipeline in pipelines:
                if pipeline is Pipeline.RM:
                    self.run_rm()
                    if self.status is RunStatus.STORM:
                        break
                elif pipeline is Pipeline.BVP:
                    if self._bvp is None:
                        self.run_bvp()
                elif pipeline is Pipeline.SPECTRUM:
                    self.run_spectrum(spectrum_at, spectrum_k)
        except RmGaussError as e:
            self._fail(RunStatus.FAILED, e.exit_code)
            self.summary["error"] = str(e)
            self._finish(started)
            raise

        self._finish(started)
        return ExperimentResult(self.exit_code, self.status, self.output_dir, self.summary, self.files)

    def _finish(self, started: float) -> None:
        self.summary["timings"]["total"] = time.perf_counter() - started
        self.summary["status"] = self.status.value
        self.summary["exit_code"] = self.exit_code
        if self._wants("summary"):
            self.files.append(write_summary_json(self._path(SUMMARY_FILE), self.summary))
        if self.ledger is not None and self.run_id is not None:
            rm = self.summary.get("rm", {})
            final_norm = rm.get("final_norm")
            self.ledger.finish_run(
                self.run_id, self.status, self.exit_code,
                sigma_total=rm.get("sigma_total"),
                final_norm=final_norm if final_norm is not None and math.isfinite(final_norm) else None,
                wall_time=self.summary["timings"]["total"],
            )


def run_experiment(cfg: ExperimentConfig, output_dir: str, pipelines: Optional[Sequence[Pipeline]] = None,
                   spectrum_at: Optional[str] = None, spectrum_k: Optional[int] = None,
                   ledger: Optional[RunLedger] = None, command: str = "run") -> ExperimentResult:
    runner = ExperimentRunner(cfg, output_dir, ledger, command)
    return runner.execute(pipelines or cfg.pipeline, spectrum_at, spectrum_k)
