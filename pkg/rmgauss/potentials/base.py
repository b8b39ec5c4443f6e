"""
Potential base class.

A potential supplies V, V' and V'' pointwise. The Gaussian averages
E[V'(u + z)], E[V''(u + z)] and E[V'(u + z)^2], z ~ N(0, s), default to a
64-node Gauss-Hermite rule; potentials with polynomial structure override the
`_average_*` hooks with closed forms.
"""
from abc import ABC, abstractmethod
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from .. import config
from ..errors import DomainError


@lru_cache(maxsize=4)
def _hermite_rule(n_nodes: int):
    nodes, weights = hermegauss(n_nodes)
    return nodes, weights / np.sqrt(2.0 * np.pi)


def _check_variance(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError(f"variance must be nonnegative, got min {float(np.min(s))!r}")
    return s


class Potential(ABC):
    name: str = "Unnamed Potential"

    @abstractmethod
    def v(self, u):
        pass

    @abstractmethod
    def v_prime(self, u):
        pass

    @abstractmethod
    def v_double_prime(self, u):
        pass

    def averaged_v_prime(self, u, s):
        """E[V'(u + z)], z ~ N(0, s)."""
        return self._average_prime(u, _check_variance(s))

    def averaged_v_double_prime(self, u, s):
        """E[V''(u + z)], z ~ N(0, s)."""
        return self._average_double_prime(u, _check_variance(s))

    def averaged_v_prime_sq(self, u, s):
        """E[V'(u + z)^2], z ~ N(0, s)."""
        return self._average_prime_sq(u, _check_variance(s))

    def _average_prime(self, u, s):
        return self.gauss_hermite(self.v_prime, u, s)

    def _average_double_prime(self, u, s):
        return self.gauss_hermite(self.v_double_prime, u, s)

    def _average_prime_sq(self, u, s):
        return self.gauss_hermite(lambda w: self.v_prime(w) ** 2, u, s)

    @staticmethod
    def gauss_hermite(fn, u, s, n_nodes: int = config.GAUSS_HERMITE_NODES):
        nodes, weights = _hermite_rule(n_nodes)
        u = np.asarray(u, dtype=float)
        s = np.asarray(s, dtype=float)
        points = u[..., None] + np.sqrt(s)[..., None] * nodes
        result = np.sum(fn(points) * weights, axis=-1)
        return float(result) if result.ndim == 0 else result

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r})"
