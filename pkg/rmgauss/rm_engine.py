"""
Truncated Robbins-Monro iteration.

Each step proposes x - a_{n+1} F(x, xi_{n+1}). A proposal inside the current
trust region U_sigma is accepted; otherwise the iterate restarts at
x0^(sigma) and the truncation counter sigma increments. Fixed policies use a
single region U1 for every sigma; expanding policies use nested regions
U0 < U1 < U2 < ... indexed by sigma.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator, List, NamedTuple, Optional, Tuple

import numpy as np

from . import config
from .errors import DomainError, ModeError, TruncationStormError
from .function_space import Grid, PathVector, ScalarState, State, norm_h1
from .gaussian import SCALAR_BLOCK, GaussianSampler, SamplerMode
from .objective import Problem, kl_estimate, noisy_oracle

logger = logging.getLogger(__name__)

RestartFn = Callable[[int], State]
MembershipFn = Callable[[State, int], bool]


class PolicyKind(str, Enum):
    FIXED = "fixed"
    EXPANDING = "expanding"


@dataclass(frozen=True)
class TrustRegionPolicy:
    kind: PolicyKind
    membership: MembershipFn
    restart: RestartFn
    description: str = ""
    # (lo, hi, growth) for interval regions: U_k = (lo - growth k, hi + growth k)
    interval: Optional[Tuple[float, float, float]] = None

    def region_index(self, sigma: int) -> int:
        """Region the iterate must stay in after sigma truncations (always U1 for fixed policies)."""
        if self.kind is PolicyKind.FIXED:
            return 1
        return sigma

    def member(self, x: State, sigma: int) -> bool:
        # non-finite states are outside every region
        if not x.is_finite():
            return False
        return bool(self.membership(x, self.region_index(sigma)))

    def restart_point(self, sigma: int) -> State:
        return self.restart(sigma)


def constant_restart(x: State) -> RestartFn:
    def restart(_sigma: int) -> State:
        return x

    return restart


class RandomRestart:
    """
    Random restart points inside U0, drawn from a private stream.

    Scalar: uniform on the open interval (lo, hi). Path: a bridge sample
    rescaled to a uniform H1 radius in [0, radius).
    """

    def __init__(self, seed: int, interval: Optional[Tuple[float, float]] = None,
                 grid: Optional[Grid] = None, radius: Optional[float] = None):
        if (interval is None) == (grid is None):
            raise DomainError("random restart needs either an interval or a grid")
        self._rng = np.random.Generator(np.random.Philox(seed))
        self.interval = interval
        self.radius = radius
        if grid is not None:
            if radius is None or radius <= 0:
                raise DomainError("random path restart needs a positive radius")
            self._directions = GaussianSampler.bridge(grid, seed + 1)

    def __call__(self, _sigma: int) -> State:
        if self.interval is not None:
            lo, hi = self.interval
            u = self._rng.uniform(0.0, 1.0)
            # keep strictly inside the open interval
            return ScalarState(lo + (hi - lo) * (0.005 + 0.99 * u))
        direction = self._directions.sample_bridge()
        scale = self.radius * self._rng.uniform(0.0, 0.99) / norm_h1(direction)
        return direction * scale


def interval_policy(kind: PolicyKind, lo: float, hi: float, restart: RestartFn,
                    growth: float = 1.0) -> TrustRegionPolicy:
    """Scalar regions U_k = (lo - growth k, hi + growth k); fixed policies use (lo, hi) throughout."""
    kind = PolicyKind(kind)
    if not lo < hi:
        raise DomainError(f"empty interval ({lo}, {hi})")

    if kind is PolicyKind.FIXED:
        def membership(x: ScalarState, _k: int) -> bool:
            return lo < x.value < hi
        desc = f"fixed U1=({lo:g}, {hi:g})"
        bounds = (lo, hi, 0.0)
    else:
        def membership(x: ScalarState, k: int) -> bool:
            return lo - growth * k < x.value < hi + growth * k
        desc = f"expanding U_k=({lo:g}-{growth:g}k, {hi:g}+{growth:g}k)"
        bounds = (lo, hi, growth)

    return TrustRegionPolicy(kind, membership, restart, desc, bounds)


def h1_ball_policy(kind: PolicyKind, radius: float, restart: RestartFn,
                   growth: float = 1.0) -> TrustRegionPolicy:
    """Path regions U_k = {|x|_H1 <= radius + growth k}; fixed policies use radius throughout."""
    kind = PolicyKind(kind)
    if not radius > 0:
        raise DomainError(f"ball radius must be positive, got {radius!r}")

    if kind is PolicyKind.FIXED:
        def membership(x: PathVector, _k: int) -> bool:
            return norm_h1(x) <= radius
        desc = f"fixed |x|_H1 <= {radius:g}"
    else:
        def membership(x: PathVector, k: int) -> bool:
            return norm_h1(x) <= radius + growth * k
        desc = f"expanding |x|_H1 <= {radius:g}+{growth:g}k"

    return TrustRegionPolicy(kind, membership, restart, desc)


@dataclass(frozen=True)
class StepSchedule:
    """a_n = a0 / (n + n0)^gamma; gamma in (1/2, 1] gives sum a_n = inf, sum a_n^2 < inf."""

    a0: float = 1.0
    n0: float = 10.0
    gamma: float = 1.0

    def __post_init__(self):
        if not self.a0 > 0:
            raise DomainError(f"a0 must be positive, got {self.a0!r}")
        if not self.n0 >= 0:
            raise DomainError(f"n0 must be nonnegative, got {self.n0!r}")
        if not 0.5 < self.gamma <= 1.0:
            raise DomainError(
                f"gamma={self.gamma!r} violates the step-size condition: need 1/2 < gamma <= 1 "
                "so that sum a_n diverges while sum a_n^2 converges"
            )

    def step(self, n: int) -> float:
        return self.a0 / (n + self.n0) ** self.gamma


@dataclass
class TraceOptions:
    record_every: int = 1
    state_every: int = 100
    store_states: bool = True
    kl_every: int = 0
    kl_samples: int = 10_000
    kl_seed: int = 0

    def __post_init__(self):
        if self.record_every < 1 or self.state_every < 1:
            raise DomainError("trace intervals must be positive")
        if self.kl_every < 0 or self.kl_samples < 1:
            raise DomainError("kl cadence must be >= 0 and kl_samples >= 1")


class StepOutcome(NamedTuple):
    x: State
    sigma: int
    truncated: bool
    proposal: State
    step: float
    nonfinite: bool


@dataclass
class RmTrace:
    n: List[int] = field(default_factory=list)
    sigma: List[int] = field(default_factory=list)
    a: List[float] = field(default_factory=list)
    truncated: List[bool] = field(default_factory=list)
    norm_x: List[float] = field(default_factory=list)
    kl: List[float] = field(default_factory=list)
    states: List[Tuple[int, State]] = field(default_factory=list)
    truncation_steps: List[int] = field(default_factory=list)
    x0: Optional[State] = None
    final_x: Optional[State] = None
    sigma_total: int = 0
    nonfinite_truncations: int = 0
    n_iters: int = 0
    wall_time: float = 0.0
    kl_initial: float = math.nan

    def rows(self) -> Iterator[dict]:
        for i in range(len(self.n)):
            yield {
                "n": self.n[i],
                "sigma": self.sigma[i],
                "a": self.a[i],
                "truncated": self.truncated[i],
                "norm_x": self.norm_x[i],
                "kl_estimate": self.kl[i],
            }

    def summary(self) -> dict:
        return {
            "n_iters": self.n_iters,
            "sigma_total": self.sigma_total,
            "nonfinite_truncations": self.nonfinite_truncations,
            "truncation_steps": list(self.truncation_steps),
            "final_norm": self.final_x.norm() if self.final_x is not None else None,
            "kl_initial": None if math.isnan(self.kl_initial) else self.kl_initial,
            "wall_time": self.wall_time,
        }


def rm_step(problem: Problem, policy: TrustRegionPolicy, schedule: StepSchedule,
            x: State, sigma: int, n: int, sampler: GaussianSampler) -> StepOutcome:
    """One truncated step from iterate x_n; consumes exactly one reference draw."""
    a = schedule.step(n + 1)
    F = noisy_oracle(problem, x, sampler)
    with np.errstate(over="ignore", invalid="ignore"):
        proposal = x - F * a

    if policy.member(proposal, sigma):
        return StepOutcome(proposal, sigma, False, proposal, a, False)

    nonfinite = not proposal.is_finite()
    if nonfinite:
        logger.warning("non-finite proposal at iteration %d (sigma=%d); truncating", n + 1, sigma)
    else:
        logger.debug("truncation at iteration %d (sigma=%d -> %d)", n + 1, sigma, sigma + 1)
    return StepOutcome(policy.restart_point(sigma), sigma + 1, True, proposal, a, nonfinite)


def _kl(problem: Problem, x: State, options: TraceOptions) -> float:
    # a fresh sampler per evaluation gives common random numbers along the trace
    return kl_estimate(problem, x, problem.new_sampler(options.kl_seed), options.kl_samples)


def _record(trace: RmTrace, problem: Problem, options: TraceOptions, step_no: int, last: bool,
            x: State, sigma: int, a: float, truncated: bool) -> None:
    if step_no % options.record_every == 0 or last:
        trace.n.append(step_no)
        trace.sigma.append(sigma)
        trace.a.append(a)
        trace.truncated.append(truncated)
        trace.norm_x.append(x.norm())
        if options.kl_every and (step_no % options.kl_every == 0 or last):
            trace.kl.append(_kl(problem, x, options))
        else:
            trace.kl.append(math.nan)
    if options.store_states and (step_no % options.state_every == 0 or last):
        trace.states.append((step_no, x))


def _storm(trace: RmTrace, x: State, sigma: int, step_no: int, sigma_cap: int, started: float) -> None:
    trace.final_x, trace.sigma_total = x, sigma
    trace.wall_time = time.perf_counter() - started
    err = TruncationStormError(sigma, step_no, sigma_cap)
    err.trace = trace
    raise err


def _run_generic(problem, policy, schedule, x, sampler, n_iters, options, sigma_cap, trace, started):
    sigma = 0
    for n in range(n_iters):
        outcome = rm_step(problem, policy, schedule, x, sigma, n, sampler)
        x, sigma = outcome.x, outcome.sigma
        step_no = n + 1

        if outcome.truncated:
            trace.truncation_steps.append(step_no)
            if outcome.nonfinite:
                trace.nonfinite_truncations += 1
            if not policy.member(x, sigma):
                raise DomainError(f"restart point for sigma={sigma - 1} lies outside its trust region")
            if sigma > sigma_cap:
                _storm(trace, x, sigma, step_no, sigma_cap, started)

        _record(trace, problem, options, step_no, step_no == n_iters, x, sigma, outcome.step, outcome.truncated)
    return x, sigma


def _run_scalar(problem, policy, schedule, x0, sampler, n_iters, options, sigma_cap, trace, started):
    """
    rm_step on plain floats for interval policies. Draws come from the sampler
    in blocks, in stream order, so the iterates match the generic loop exactly.
    """
    if sampler.mode is not SamplerMode.SCALAR:
        raise ModeError("scalar problem needs a scalar sampler")
    v_prime = problem.potential.v_prime
    inv_eps = 1.0 / problem.epsilon
    a0, n0, gamma = schedule.a0, schedule.n0, schedule.gamma
    lo, hi, growth = policy.interval
    fixed = policy.kind is PolicyKind.FIXED

    def bounds(sigma):
        k = 1 if fixed else sigma
        return lo - growth * k, hi + growth * k

    x, sigma = x0.value, 0
    lo_k, hi_k = bounds(sigma)
    record_every, state_every = options.record_every, options.state_every
    step_no = 0
    while step_no < n_iters:
        draws = sampler.sample_block(min(SCALAR_BLOCK, n_iters - step_no)).tolist()
        for xi in draws:
            step_no += 1
            a = a0 / (step_no + n0) ** gamma
            try:
                proposal = x - (inv_eps * v_prime(x + xi) + x) * a
            except OverflowError:
                proposal = math.nan
            truncated = not lo_k < proposal < hi_k
            if truncated:
                if not math.isfinite(proposal):
                    logger.warning("non-finite proposal at iteration %d (sigma=%d); truncating", step_no, sigma)
                    trace.nonfinite_truncations += 1
                else:
                    logger.debug("truncation at iteration %d (sigma=%d -> %d)", step_no, sigma, sigma + 1)
                restart = policy.restart_point(sigma)
                sigma += 1
                trace.truncation_steps.append(step_no)
                if not policy.member(restart, sigma):
                    raise DomainError(f"restart point for sigma={sigma - 1} lies outside its trust region")
                x = restart.value
                lo_k, hi_k = bounds(sigma)
                if sigma > sigma_cap:
                    _storm(trace, ScalarState(x), sigma, step_no, sigma_cap, started)
            else:
                x = proposal

            last = step_no == n_iters
            if last or step_no % record_every == 0 or (options.store_states and step_no % state_every == 0):
                _record(trace, problem, options, step_no, last, ScalarState(x), sigma, a, truncated)
    return ScalarState(x), sigma


def rm_run(problem: Problem, policy: TrustRegionPolicy, schedule: StepSchedule, x0: State,
           sampler: GaussianSampler, n_iters: int, trace_options: Optional[TraceOptions] = None,
           sigma_cap: int = config.DEFAULT_SIGMA_CAP) -> RmTrace:
    """Run n_iters truncated steps from (x0, sigma=0)."""
    if n_iters < 1:
        raise DomainError("n_iters must be positive")
    if not policy.member(x0, 0):
        raise DomainError("initial state must lie in the first trust region U0")
    options = trace_options or TraceOptions()

    trace = RmTrace(x0=x0, n_iters=n_iters)
    if options.kl_every:
        trace.kl_initial = _kl(problem, x0, options)

    logger.info("RM run: %d iterations, %s, schedule %s", n_iters, policy.description, schedule)
    started = time.perf_counter()

    run = _run_scalar if not problem.is_path and policy.interval is not None else _run_generic
    x, sigma = run(problem, policy, schedule, x0, sampler, n_iters, options, sigma_cap, trace, started)

    trace.final_x = x
    trace.sigma_total = sigma
    trace.wall_time = time.perf_counter() - started
    logger.info(
        "RM run done: sigma_total=%d (non-finite %d), final norm %.6g, %.2fs",
        sigma, trace.nonfinite_truncations, x.norm(), trace.wall_time,
    )
    return trace
