"""
Discretized Hilbert-space primitives on (0, 1) with Dirichlet boundary.

Paths are stored at the interior nodes t_i = i*dt, i = 1..n; boundary values
are zero by construction. C0 is the inverse of the 3-point Dirichlet
Laplacian, so the Cameron-Martin norm coincides with the discrete H^1_0 norm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy.linalg import solve_banded

from .errors import DomainError, GridMismatchError, SingularJacobianError


@dataclass(frozen=True)
class Grid:
    """Uniform grid on (0, 1) with n_interior interior nodes."""

    n_interior: int

    def __post_init__(self):
        if int(self.n_interior) != self.n_interior or self.n_interior < 1:
            raise DomainError(f"n_interior must be a positive integer, got {self.n_interior!r}")

    @property
    def dt(self) -> float:
        return 1.0 / (self.n_interior + 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(1, self.n_interior + 1) * self.dt

    @property
    def nodes_with_boundary(self) -> np.ndarray:
        return np.arange(0, self.n_interior + 2) * self.dt

    @property
    def bridge_variance(self) -> np.ndarray:
        """Pointwise variance t(1-t) of the unit Brownian bridge at the interior nodes."""
        t = self.nodes
        return t * (1.0 - t)


class ScalarState:
    """Scalar iterate x in R (reference measure N(0, 1))."""

    __slots__ = ("value",)

    def __init__(self, value: float):
        self.value = float(value)

    def __add__(self, other: "ScalarState") -> "ScalarState":
        return ScalarState(self.value + other.value)

    def __sub__(self, other: "ScalarState") -> "ScalarState":
        return ScalarState(self.value - other.value)

    def __mul__(self, factor: float) -> "ScalarState":
        return ScalarState(self.value * factor)

    __rmul__ = __mul__

    def __neg__(self) -> "ScalarState":
        return ScalarState(-self.value)

    def __eq__(self, other) -> bool:
        return isinstance(other, ScalarState) and self.value == other.value

    def __repr__(self) -> str:
        return f"ScalarState({self.value!r})"

    def is_finite(self) -> bool:
        return math.isfinite(self.value)

    def norm(self) -> float:
        return abs(self.value)


class PathVector:
    """Element of H^1_0(0,1) given by its values at the interior nodes of a grid."""

    __slots__ = ("values", "grid")

    def __init__(self, values, grid: Grid):
        arr = np.asarray(values, dtype=float)
        if arr.shape != (grid.n_interior,):
            raise DomainError(
                f"path has shape {arr.shape}, expected ({grid.n_interior},) for this grid"
            )
        self.values = arr
        self.grid = grid

    @classmethod
    def zeros(cls, grid: Grid) -> "PathVector":
        return cls(np.zeros(grid.n_interior), grid)

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> "PathVector":
        return cls(fn(grid.nodes), grid)

    def with_boundary(self) -> np.ndarray:
        return np.concatenate(([0.0], self.values, [0.0]))

    def _check(self, other: "PathVector") -> None:
        if self.grid != other.grid:
            raise GridMismatchError(
                f"paths live on different grids (n={self.grid.n_interior} vs n={other.grid.n_interior})"
            )

    def __add__(self, other: "PathVector") -> "PathVector":
        self._check(other)
        return PathVector(self.values + other.values, self.grid)

    def __sub__(self, other: "PathVector") -> "PathVector":
        self._check(other)
        return PathVector(self.values - other.values, self.grid)

    def __mul__(self, factor: float) -> "PathVector":
        return PathVector(self.values * factor, self.grid)

    __rmul__ = __mul__

    def __neg__(self) -> "PathVector":
        return PathVector(-self.values, self.grid)

    def __repr__(self) -> str:
        return f"PathVector(n={self.grid.n_interior}, norm_h1={norm_h1(self):.6g})"

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def norm(self) -> float:
        return norm_h1(self)


State = Union[ScalarState, PathVector]


def _same_grid(a: PathVector, b: PathVector) -> Grid:
    if a.grid != b.grid:
        raise GridMismatchError(
            f"paths live on different grids (n={a.grid.n_interior} vs n={b.grid.n_interior})"
        )
    return a.grid


def inner_l2(a: PathVector, b: PathVector) -> float:
    grid = _same_grid(a, b)
    return float(np.dot(a.values, b.values) * grid.dt)


def norm_l2(a: PathVector) -> float:
    return math.sqrt(inner_l2(a, a))


def norm_h1(x: PathVector) -> float:
    """Discrete Dirichlet norm, equal to the Cameron-Martin norm of the bridge covariance."""
    dt = x.grid.dt
    slopes = np.diff(x.with_boundary()) / dt
    return math.sqrt(float(np.dot(slopes, slopes)) * dt)


@lru_cache(maxsize=32)
def _laplacian_bands(n: int) -> np.ndarray:
    dt = 1.0 / (n + 1)
    bands = np.empty((3, n))
    bands[0, :] = -1.0 / dt**2
    bands[1, :] = 2.0 / dt**2
    bands[2, :] = -1.0 / dt**2
    bands[0, 0] = 0.0
    bands[2, -1] = 0.0
    bands.setflags(write=False)
    return bands


def apply_c0(rhs: PathVector) -> PathVector:
    """Solve (-Delta_dt) u = rhs, i.e. u = C0 rhs."""
    return PathVector(apply_c0_array(rhs.values, rhs.grid), rhs.grid)


def apply_c0_array(rhs: np.ndarray, grid: Grid) -> np.ndarray:
    """C0 applied to raw node values; a 2-D rhs of shape (batch, n) is solved row-wise."""
    bands = _laplacian_bands(grid.n_interior)
    if grid.n_interior == 1:
        return np.asarray(rhs, dtype=float) * (grid.dt**2 / 2.0)
    rhs = np.asarray(rhs, dtype=float)
    if rhs.ndim == 2:
        return solve_banded((1, 1), bands, rhs.T, check_finite=False).T
    return solve_banded((1, 1), bands, rhs, check_finite=False)


def apply_c0_inverse(u: PathVector) -> PathVector:
    """(-Delta_dt) u with zero Dirichlet closure."""
    return PathVector(apply_c0_inverse_array(u.values, u.grid), u.grid)


def apply_c0_inverse_array(values: np.ndarray, grid: Grid) -> np.ndarray:
    padded = np.concatenate(([0.0], values, [0.0]))
    return (2.0 * padded[1:-1] - padded[:-2] - padded[2:]) / grid.dt**2


def solve_tridiagonal(sub: np.ndarray, diag: np.ndarray, sup: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """
    Thomas algorithm for  sub[i] u[i-1] + diag[i] u[i] + sup[i] u[i+1] = rhs[i].

    sub[0] and sup[-1] are ignored. A zero pivot raises SingularJacobianError
    naming the (1-based) grid node where elimination broke down.
    """
    n = len(diag)
    c = np.zeros(n)
    d = np.zeros(n)

    pivot = diag[0]
    if pivot == 0.0:
        raise SingularJacobianError(1)
    c[0] = sup[0] / pivot if n > 1 else 0.0
    d[0] = rhs[0] / pivot
    for i in range(1, n):
        pivot = diag[i] - sub[i] * c[i - 1]
        if pivot == 0.0:
            raise SingularJacobianError(i + 1)
        c[i] = sup[i] / pivot if i < n - 1 else 0.0
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / pivot

    u = np.empty(n)
    u[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        u[i] = d[i] - c[i] * u[i + 1]
    return u


def laplacian_eigenvalues(grid: Grid) -> np.ndarray:
    """Eigenvalues (4/dt^2) sin^2(k pi dt / 2), k = 1..n, of the discrete Dirichlet Laplacian."""
    k = np.arange(1, grid.n_interior + 1)
    return (4.0 / grid.dt**2) * np.sin(k * np.pi * grid.dt / 2.0) ** 2


def c0_eigenvalues(grid: Grid) -> np.ndarray:
    """Eigenvalues of the discrete C0, largest first."""
    return 1.0 / laplacian_eigenvalues(grid)


def largest_c0_eigenvalue(grid: Grid) -> float:
    """lambda_1 of the discrete C0; tends to 1/pi^2 as dt -> 0."""
    return float(c0_eigenvalues(grid)[0])


def resample(values_with_boundary: np.ndarray, target: Grid) -> PathVector:
    """Piecewise-linear evaluation of a boundary-inclusive node array on another grid."""
    src_t = np.linspace(0.0, 1.0, len(values_with_boundary))
    return PathVector(np.interp(target.nodes, src_t, values_with_boundary), target)
