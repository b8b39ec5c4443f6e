"""
Built-in potentials with closed-form Gaussian averages.

Averages use E[z^2k] = (2k-1)!! s^k for z ~ N(0, s).
"""
from .base import Potential


class Quartic(Potential):
    """V(u) = u^2/2 + u^4/4 (globally convex)."""

    name = "quartic"

    def v(self, u):
        return 0.5 * u**2 + 0.25 * u**4

    def v_prime(self, u):
        return u + u**3

    def v_double_prime(self, u):
        return 1.0 + 3.0 * u**2

    def _average_prime(self, u, s):
        return u + u**3 + 3.0 * s * u

    def _average_double_prime(self, u, s):
        return 1.0 + 3.0 * u**2 + 3.0 * s

    def _average_prime_sq(self, u, s):
        u2 = u * u
        return (
            u2**3
            + (2.0 + 15.0 * s) * u2**2
            + (1.0 + 12.0 * s + 45.0 * s**2) * u2
            + s + 6.0 * s**2 + 15.0 * s**3
        )


class DoubleWell(Potential):
    """V(u) = (4 - u^2)^2 / 4, wells at u = +-2."""

    name = "double_well"

    def v(self, u):
        return 0.25 * (4.0 - u**2) ** 2

    def v_prime(self, u):
        return u**3 - 4.0 * u

    def v_double_prime(self, u):
        return 3.0 * u**2 - 4.0

    def _average_prime(self, u, s):
        return u**3 + 3.0 * s * u - 4.0 * u

    def _average_double_prime(self, u, s):
        return 3.0 * u**2 + 3.0 * s - 4.0

    def _average_prime_sq(self, u, s):
        u2 = u * u
        return (
            u2**3
            + (15.0 * s - 8.0) * u2**2
            + (45.0 * s**2 - 48.0 * s + 16.0) * u2
            + 15.0 * s**3 - 24.0 * s**2 + 16.0 * s
        )


class LinearForce(Potential):
    """V(u) = c u: constant force, used as an analytic boundary-value check."""

    name = "linear_force"

    def __init__(self, c: float = 1.0):
        self.c = float(c)

    def v(self, u):
        return self.c * u

    def v_prime(self, u):
        return self.c + 0.0 * u

    def v_double_prime(self, u):
        return 0.0 * u

    def _average_prime(self, u, s):
        return self.c + 0.0 * (u + s)

    def _average_double_prime(self, u, s):
        return 0.0 * (u + s)

    def _average_prime_sq(self, u, s):
        return self.c**2 + 0.0 * (u + s)
