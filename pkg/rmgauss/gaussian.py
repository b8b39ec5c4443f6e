"""
Samplers for the reference Gaussian mu0 = N(0, C0).

Scalar mode draws standard normals. Bridge mode draws the standard unit
Brownian bridge on a grid through the full Karhunen-Loeve expansion in the
exact eigenpairs of the discrete C0, so the sample covariance is the discrete
C0 itself (at the nodes this is min(s,t) - st).
"""
from __future__ import annotations

import logging
from enum import Enum
from typing import Optional

import numpy as np
from scipy.fft import dst

from .errors import DomainError, ModeError
from .function_space import Grid, PathVector, c0_eigenvalues

logger = logging.getLogger(__name__)

# Draws are generated in blocks; the stream for a given seed is fixed
# regardless of how calls are interleaved.
SCALAR_BLOCK = 8192
BRIDGE_BLOCK_VALUES = 1 << 17


class SamplerMode(str, Enum):
    SCALAR = "scalar"
    BRIDGE = "bridge"


class GaussianSampler:
    """Reproducible stream of reference-measure draws (single-threaded)."""

    def __init__(self, mode: SamplerMode, seed: int, grid: Optional[Grid] = None):
        mode = SamplerMode(mode)
        if mode is SamplerMode.BRIDGE and grid is None:
            raise ModeError("bridge sampler requires a grid")
        if mode is SamplerMode.SCALAR and grid is not None:
            raise ModeError("scalar sampler does not take a grid")
        if not 0 <= int(seed) < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed!r}")

        self.mode = mode
        self.grid = grid
        self.seed = int(seed)
        # Philox is counter-based: streams for seed, seed+1, ... are independent
        self._rng = np.random.Generator(np.random.Philox(self.seed))
        self._buffer: list | np.ndarray = []
        self._pos = 0

        if mode is SamplerMode.BRIDGE:
            self._kl_scale = np.sqrt(c0_eigenvalues(grid)) / np.sqrt(2.0)
            self._block_rows = max(1, BRIDGE_BLOCK_VALUES // grid.n_interior)

    @classmethod
    def scalar(cls, seed: int) -> "GaussianSampler":
        return cls(SamplerMode.SCALAR, seed)

    @classmethod
    def bridge(cls, grid: Grid, seed: int) -> "GaussianSampler":
        return cls(SamplerMode.BRIDGE, seed, grid)

    def _refill(self) -> None:
        if self.mode is SamplerMode.SCALAR:
            self._buffer = self._rng.standard_normal(SCALAR_BLOCK).tolist()
        else:
            z = self._rng.standard_normal((self._block_rows, self.grid.n_interior))
            # xi_i = sum_k z_k sqrt(lambda_k) sqrt(2) sin(k pi t_i); DST-I supplies 2 * sum sin(.)
            self._buffer = dst(z * self._kl_scale, type=1, axis=-1)
        self._pos = 0

    def _next(self):
        if self._pos >= len(self._buffer):
            self._refill()
        item = self._buffer[self._pos]
        self._pos += 1
        return item

    def sample_scalar(self) -> float:
        if self.mode is not SamplerMode.SCALAR:
            raise ModeError("sample_scalar called on a bridge sampler")
        return self._next()

    def sample_bridge(self) -> PathVector:
        if self.mode is not SamplerMode.BRIDGE:
            raise ModeError("sample_bridge called on a scalar sampler")
        return PathVector(self._next(), self.grid)

    def sample_block(self, count: int) -> np.ndarray:
        """`count` consecutive draws from the stream: shape (count,) or (count, n_interior)."""
        if count < 1:
            raise DomainError("count must be positive")
        rows = []
        remaining = count
        while remaining > 0:
            if self._pos >= len(self._buffer):
                self._refill()
            take = min(remaining, len(self._buffer) - self._pos)
            rows.append(np.asarray(self._buffer[self._pos:self._pos + take], dtype=float))
            self._pos += take
            remaining -= take
        return np.concatenate(rows, axis=0)
