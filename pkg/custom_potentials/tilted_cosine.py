"""
Example user potential: V(u) = u^2/2 + (1 - cos(pi u)) / pi^2.

No closed-form averages are given, so the Gaussian averages run through the
Gauss-Hermite rule of the base class. V'' = 1 + cos(pi u) >= 0.
"""
import numpy as np

from rmgauss.potentials.base import Potential


class TiltedCosine(Potential):
    name = "tilted_cosine"

    def v(self, u):
        return 0.5 * u**2 + (1.0 - np.cos(np.pi * u)) / np.pi**2

    def v_prime(self, u):
        return u + np.sin(np.pi * u) / np.pi

    def v_double_prime(self, u):
        return 1.0 + np.cos(np.pi * u)
