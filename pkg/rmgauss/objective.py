"""
The preconditioned root problem for the mean of the best-fit Gaussian.

For a state x = m - m0, with xi ~ N(0, C0):

    F(x, xi) = C0 Phi'(x + m0 + xi) + x          (noisy oracle)
    f(x)     = C0 E[Phi'(x + m0 + xi)] + x       (drift, f = E F)
    J(x)     = E[Phi(x + m0 + xi)] + |x|^2_C0 / 2 + const

where Phi(u) = eps^-1 V(u) for scalar problems and eps^-1 int_0^1 V(u(t)) dt on
paths. Scalar problems have C0 = 1 and m0 = 0.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DomainError, GridMismatchError, ModeError
from .function_space import (
    Grid,
    PathVector,
    ScalarState,
    State,
    apply_c0_array,
    largest_c0_eigenvalue,
    norm_h1,
)
from .gaussian import GaussianSampler, SamplerMode
from .potentials import Potential

logger = logging.getLogger(__name__)


class ProblemMode(str, Enum):
    SCALAR = "scalar"
    PATH = "path"


@dataclass(frozen=True, eq=False)
class Problem:
    mode: ProblemMode
    potential: Potential
    epsilon: float
    grid: Optional[Grid] = None
    m_minus: float = 0.0
    m_plus: float = 0.0
    # reference mean at the interior nodes (path mode); linear interpolant when omitted
    m0: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "mode", ProblemMode(self.mode))
        if not self.epsilon > 0:
            raise DomainError(f"epsilon must be positive, got {self.epsilon!r}")

        if self.mode is ProblemMode.SCALAR:
            if self.grid is not None:
                raise ModeError("scalar problems do not take a grid")
            return

        if self.grid is None:
            raise ModeError("path problems require a grid")
        if self.m0 is None:
            t = self.grid.nodes
            m0 = (1.0 - t) * self.m_minus + t * self.m_plus
        else:
            m0 = np.asarray(self.m0, dtype=float)
            if m0.shape != (self.grid.n_interior,):
                raise DomainError(f"m0 has shape {m0.shape}, expected ({self.grid.n_interior},)")
        m0.setflags(write=False)
        object.__setattr__(self, "m0", m0)

    @classmethod
    def scalar(cls, potential: Potential, epsilon: float) -> "Problem":
        return cls(ProblemMode.SCALAR, potential, epsilon)

    @classmethod
    def path(cls, potential: Potential, epsilon: float, grid: Grid,
             m_minus: float = 0.0, m_plus: float = 0.0, m0=None) -> "Problem":
        return cls(ProblemMode.PATH, potential, epsilon, grid, m_minus, m_plus, m0)

    @property
    def is_path(self) -> bool:
        return self.mode is ProblemMode.PATH

    def m0_with_boundary(self) -> np.ndarray:
        return np.concatenate(([self.m_minus], self.m0, [self.m_plus]))

    def zero_state(self) -> State:
        return PathVector.zeros(self.grid) if self.is_path else ScalarState(0.0)

    def new_sampler(self, seed: int) -> GaussianSampler:
        if self.is_path:
            return GaussianSampler(SamplerMode.BRIDGE, seed, self.grid)
        return GaussianSampler(SamplerMode.SCALAR, seed)

    def describe(self) -> dict:
        info = {
            "mode": self.mode.value,
            "potential": self.potential.name,
            "epsilon": self.epsilon,
        }
        if self.is_path:
            info.update(n_interior=self.grid.n_interior, m_minus=self.m_minus, m_plus=self.m_plus)
        return info


def _check_state(problem: Problem, x: State) -> None:
    if problem.is_path:
        if not isinstance(x, PathVector):
            raise ModeError("path problem needs a PathVector state")
        if x.grid != problem.grid:
            raise GridMismatchError(
                f"state grid n={x.grid.n_interior} differs from problem grid n={problem.grid.n_interior}"
            )
    elif not isinstance(x, ScalarState):
        raise ModeError("scalar problem needs a ScalarState")


def evaluate_oracle(problem: Problem, x: State, xi) -> State:
    """F(x, xi) for a given reference draw xi (float or PathVector)."""
    inv_eps = 1.0 / problem.epsilon
    if not problem.is_path:
        try:
            return ScalarState(inv_eps * problem.potential.v_prime(x.value + xi) + x.value)
        except OverflowError:
            return ScalarState(math.inf)

    xi_values = xi.values if isinstance(xi, PathVector) else np.asarray(xi, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        g = inv_eps * problem.potential.v_prime(x.values + problem.m0 + xi_values)
        return PathVector(apply_c0_array(g, problem.grid) + x.values, problem.grid)


def noisy_oracle(problem: Problem, x: State, sampler: GaussianSampler) -> State:
    """F(x, xi) with one fresh draw xi ~ mu0 from the sampler."""
    _check_state(problem, x)
    if problem.is_path:
        if sampler.mode is not SamplerMode.BRIDGE:
            raise ModeError("path problem needs a bridge sampler")
        return evaluate_oracle(problem, x, sampler.sample_bridge())
    if sampler.mode is not SamplerMode.SCALAR:
        raise ModeError("scalar problem needs a scalar sampler")
    return evaluate_oracle(problem, x, sampler.sample_scalar())


def oracle_batch(problem: Problem, x: State, xis: np.ndarray) -> np.ndarray:
    """F(x, xi) for a batch of draws; rows of the result are oracle values."""
    _check_state(problem, x)
    inv_eps = 1.0 / problem.epsilon
    xis = np.asarray(xis, dtype=float)
    if not problem.is_path:
        return inv_eps * problem.potential.v_prime(x.value + xis) + x.value
    g = inv_eps * problem.potential.v_prime(x.values + problem.m0 + xis)
    return apply_c0_array(g, problem.grid) + x.values


def drift(problem: Problem, x: State) -> State:
    """f(x) = C0 E[Phi'(x + m0 + xi)] + x in closed form (Var xi(t) = t(1-t) on paths)."""
    _check_state(problem, x)
    inv_eps = 1.0 / problem.epsilon
    if not problem.is_path:
        return ScalarState(inv_eps * problem.potential.averaged_v_prime(x.value, 1.0) + x.value)

    g = inv_eps * problem.potential.averaged_v_prime(x.values + problem.m0, problem.grid.bridge_variance)
    return PathVector(apply_c0_array(g, problem.grid) + x.values, problem.grid)


def kl_samples(problem: Problem, x: State, sampler: GaussianSampler, n_samples: int) -> np.ndarray:
    """Per-draw values of Phi(x + m0 + xi) + |x|^2_C0 / 2; their mean estimates J(x) - log Z."""
    _check_state(problem, x)
    if n_samples < 1:
        raise DomainError("n_samples must be positive")
    inv_eps = 1.0 / problem.epsilon
    xis = sampler.sample_block(n_samples)

    if not problem.is_path:
        return inv_eps * problem.potential.v(x.value + xis) + 0.5 * x.value**2

    integrand = problem.potential.v(x.values + problem.m0 + xis)
    potential_term = inv_eps * integrand.sum(axis=-1) * problem.grid.dt
    return potential_term + 0.5 * norm_h1(x) ** 2


def kl_estimate(problem: Problem, x: State, sampler: GaussianSampler, n_samples: int) -> float:
    """Monte Carlo estimate of the relative entropy up to the additive constant log Z."""
    return float(np.mean(kl_samples(problem, x, sampler, n_samples)))


def second_variation_diag(problem: Problem, x: State) -> np.ndarray:
    """
    Multiplication part q of J''(x) = q + C0^-1, one value per node
    (a length-1 array for scalar problems).
    """
    _check_state(problem, x)
    inv_eps = 1.0 / problem.epsilon
    if not problem.is_path:
        return np.atleast_1d(inv_eps * problem.potential.averaged_v_double_prime(x.value, 1.0))
    return np.asarray(
        inv_eps * problem.potential.averaged_v_double_prime(
            x.values + problem.m0, problem.grid.bridge_variance
        ),
        dtype=float,
    )


def second_moment_bound(problem: Problem, x: State) -> float:
    """
    Closed-form bound on E[|F(x, xi)|^2_C0].

    Path: 2 lambda_1 eps^-2 int E|V'|^2 dt + 2 |x|^2_H1. Scalar: the exact value
    eps^-2 E|V'|^2 + 2 eps^-1 x E[V'] + x^2.
    """
    _check_state(problem, x)
    inv_eps = 1.0 / problem.epsilon
    pot = problem.potential
    if not problem.is_path:
        return float(
            inv_eps**2 * pot.averaged_v_prime_sq(x.value, 1.0)
            + 2.0 * inv_eps * x.value * pot.averaged_v_prime(x.value, 1.0)
            + x.value**2
        )
    grid = problem.grid
    mean_sq = pot.averaged_v_prime_sq(x.values + problem.m0, grid.bridge_variance)
    return float(
        2.0 * largest_c0_eigenvalue(grid) * inv_eps**2 * np.sum(mean_sq) * grid.dt
        + 2.0 * norm_h1(x) ** 2
    )
