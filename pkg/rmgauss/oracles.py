"""
Deterministic reference computations for path problems.

bvp_solve runs Newton on the discretized Euler-Lagrange equation
eps^-1 E[V'(x + m0 + xi)] - x'' = 0, x(0) = x(1) = 0, whose roots are the
roots of the RM drift. schrodinger_eigs computes the low spectrum of the
discretized second variation J'' = -d^2/dt^2 + q by Sturm-sequence bisection.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import config
from .errors import DomainError, ModeError
from .function_space import (
    PathVector,
    apply_c0_inverse_array,
    largest_c0_eigenvalue,
    norm_h1,
    solve_tridiagonal,
)
from .objective import Problem, drift, second_variation_diag

logger = logging.getLogger(__name__)


@dataclass
class BvpSolution:
    x_star: PathVector
    residual_h1: float
    newton_iters: int
    converged: bool

    def mean_path(self, problem: Problem) -> np.ndarray:
        """x_star + m0 including the boundary values."""
        return self.x_star.with_boundary() + problem.m0_with_boundary()


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    operator_desc: str
    gershgorin_lower: float
    gershgorin_upper: float


@dataclass
class ConvexityReport:
    min_eig: float
    min_q: float
    theta_bound: float
    # pointwise condition q >= -theta/lambda_1 with theta < 1
    satisfies_pointwise_bound: bool

    @property
    def spectrally_convex(self) -> bool:
        return self.min_eig > 0


def _require_path(problem: Problem) -> None:
    if not problem.is_path:
        raise ModeError("this oracle is defined for path problems only")


def _residual(problem: Problem, x: np.ndarray) -> np.ndarray:
    """G(x) = eps^-1 E[V'(x + m0 + xi)] + (-Delta_dt) x."""
    grid = problem.grid
    g = problem.potential.averaged_v_prime(x + problem.m0, grid.bridge_variance) / problem.epsilon
    return g + apply_c0_inverse_array(x, grid)


def _preconditioned_norm(problem: Problem, x: np.ndarray) -> float:
    return norm_h1(drift(problem, PathVector(x, problem.grid)))


def front_state(problem: Problem) -> PathVector:
    """
    x for the mean m(t) = m_minus + (m_plus - m_minus) tanh(t/w) / tanh(1/w),
    w = sqrt(eps/2): a front leaving m_minus at t=0 and settling on the m_plus
    level. For the double well this is the half-kink of eps m'' = V'(m).
    """
    _require_path(problem)
    t = problem.grid.nodes
    width = np.sqrt(problem.epsilon / 2.0)
    profile = np.tanh(t / width) / np.tanh(1.0 / width)
    mean = problem.m_minus + (problem.m_plus - problem.m_minus) * profile
    return PathVector(mean - problem.m0, problem.grid)


def bvp_solve(problem: Problem, x_init: Optional[PathVector] = None,
              tol: float = config.DEFAULT_BVP_TOL,
              max_iters: int = config.DEFAULT_BVP_MAX_ITERS,
              max_halvings: int = config.DEFAULT_MAX_HALVINGS,
              max_step: float = config.DEFAULT_BVP_MAX_STEP) -> BvpSolution:
    """
    Damped Newton iteration from x_init (front_state when omitted); converged
    when the H1 norm of the Newton update is at most tol. Each step moves no
    node by more than max_step, and is halved while the C0-preconditioned
    residual fails to decrease.
    """
    _require_path(problem)
    if not tol > 0 or max_iters < 1 or not max_step > 0:
        raise DomainError("tol and max_step must be positive and max_iters >= 1")

    grid = problem.grid
    n = grid.n_interior
    inv_dt2 = 1.0 / grid.dt**2
    off = np.full(n, -inv_dt2)

    if x_init is None:
        x_init = front_state(problem)
    x = np.array(x_init.values, dtype=float)
    res_norm = _preconditioned_norm(problem, x)
    update_norm = np.inf

    for it in range(1, max_iters + 1):
        q = second_variation_diag(problem, PathVector(x, grid))
        delta = solve_tridiagonal(off, 2.0 * inv_dt2 + q, off, -_residual(problem, x))
        update_norm = norm_h1(PathVector(delta, grid))
        if update_norm <= tol:
            logger.debug("newton %d: |dx|_H1=%.3e converged", it, update_norm)
            return BvpSolution(PathVector(x + delta, grid), float(update_norm), it, True)

        full = min(1.0, max_step / float(np.max(np.abs(delta))))
        lam = full
        for _ in range(max_halvings):
            trial = x + lam * delta
            trial_norm = _preconditioned_norm(problem, trial)
            if np.isfinite(trial_norm) and trial_norm < res_norm:
                break
            lam *= 0.5
        else:
            # no decrease found: take the longest allowed step
            lam = full
            trial = x + lam * delta
            trial_norm = _preconditioned_norm(problem, trial)

        x, res_norm = trial, trial_norm
        logger.debug("newton %d: |dx|_H1=%.3e step=%.3g |f(x)|_H1=%.3e", it, update_norm, lam, res_norm)

    logger.warning("Newton did not converge in %d iterations (last |dx|_H1=%.3e)", max_iters, update_norm)
    return BvpSolution(PathVector(x, grid), float(update_norm), max_iters, False)


def _tridiagonal(problem: Problem, q: np.ndarray):
    inv_dt2 = 1.0 / problem.grid.dt**2
    return 2.0 * inv_dt2 + np.asarray(q, dtype=float), inv_dt2


def gershgorin_bounds(diag: np.ndarray, off: float) -> tuple[float, float]:
    n = len(diag)
    radius = np.full(n, 2.0 * abs(off))
    radius[0] = radius[-1] = abs(off)
    if n == 1:
        radius[0] = 0.0
    return float(np.min(diag - radius)), float(np.max(diag + radius))


def sturm_count(diag: np.ndarray, off: float, lam: np.ndarray) -> np.ndarray:
    """
    Number of eigenvalues strictly below each shift in lam for the symmetric
    tridiagonal matrix with the given diagonal and constant off-diagonal,
    counted by the signs of the LDL^T pivots.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    off_sq = off * off
    tiny = np.finfo(float).tiny
    count = np.zeros(lam.shape, dtype=int)
    d = diag[0] - lam
    count += d < 0
    for i in range(1, len(diag)):
        d = np.where(d == 0.0, tiny, d)
        d = diag[i] - lam - off_sq / d
        count += d < 0
    return count


def tridiagonal_eigs(diag: np.ndarray, off: float, k: int, rel_width: float = 1e-10) -> np.ndarray:
    """The k smallest eigenvalues, each bracketed to rel_width times the Gershgorin scale."""
    diag = np.asarray(diag, dtype=float)
    lo_bound, hi_bound = gershgorin_bounds(diag, off)
    width = rel_width * max(abs(lo_bound), abs(hi_bound), 1.0)

    targets = np.arange(1, k + 1)
    lo = np.full(k, lo_bound - width)
    hi = np.full(k, hi_bound + width)
    for _ in range(200):
        if np.all(hi - lo <= width):
            break
        mid = 0.5 * (lo + hi)
        below = sturm_count(diag, off, mid) >= targets
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
    return 0.5 * (lo + hi)


def schrodinger_eigs(problem: Problem, x: PathVector, k: int) -> SpectrumReport:
    """k smallest eigenvalues of (-Delta_dt) + diag(q(x)), ascending."""
    _require_path(problem)
    n = problem.grid.n_interior
    if not 1 <= k <= n:
        raise DomainError(f"k must lie in [1, {n}], got {k}")

    diag, inv_dt2 = _tridiagonal(problem, second_variation_diag(problem, x))
    lo, hi = gershgorin_bounds(diag, -inv_dt2)
    eigs = tridiagonal_eigs(diag, -inv_dt2, k)
    desc = f"J'' for {problem.potential.name}, eps={problem.epsilon:g}, at |x|_H1={norm_h1(x):.6g}"
    return SpectrumReport(np.sort(eigs), desc, lo, hi)


def convexity_check(problem: Problem, x: PathVector) -> ConvexityReport:
    """Spectral and pointwise convexity diagnostics of J'' at x."""
    _require_path(problem)
    q = second_variation_diag(problem, x)
    min_eig = float(schrodinger_eigs(problem, x, 1).eigenvalues[0])
    min_q = float(np.min(q))
    theta = max(0.0, -largest_c0_eigenvalue(problem.grid) * min_q)
    return ConvexityReport(min_eig, min_q, theta, theta < 1.0)
