import numpy as np
import pytest

from rmgauss.errors import ConfigError, DomainError
from rmgauss.potentials import BUILTIN_POTENTIALS, DoubleWell, LinearForce, Potential, Quartic, get_potential

U = np.linspace(-5.0, 5.0, 101)


def test_values():
    assert Quartic().v(1.0) == 0.75
    assert DoubleWell().v(2.0) == 0.0
    assert DoubleWell().v(0.0) == 4.0
    assert DoubleWell().v_prime(2.0) == 0.0
    assert DoubleWell().v_prime(-2.0) == 0.0


@pytest.mark.parametrize("potential", [Quartic(), DoubleWell(), LinearForce(1.5)])
def test_derivatives_match_finite_differences(potential):
    h = 1e-4
    fd_prime = (potential.v(U + h) - potential.v(U - h)) / (2 * h)
    fd_second = (potential.v_prime(U + h) - potential.v_prime(U - h)) / (2 * h)
    np.testing.assert_allclose(potential.v_prime(U), fd_prime, rtol=1e-6, atol=1e-5)
    np.testing.assert_allclose(potential.v_double_prime(U), fd_second, rtol=1e-6, atol=1e-5)


@pytest.mark.parametrize("potential", [Quartic(), DoubleWell()])
@pytest.mark.parametrize("s", [0.0, 0.25, 1.0])
def test_closed_forms_match_quadrature(potential, s):
    quad = Potential.gauss_hermite
    np.testing.assert_allclose(potential.averaged_v_prime(U, s), quad(potential.v_prime, U, s),
                               rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(potential.averaged_v_double_prime(U, s), quad(potential.v_double_prime, U, s),
                               rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(potential.averaged_v_prime_sq(U, s),
                               quad(lambda w: potential.v_prime(w) ** 2, U, s), rtol=1e-9, atol=1e-9)


def test_double_well_unit_variance_forms():
    dw = DoubleWell()
    x = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(dw.averaged_v_prime(x, 1.0), x**3 - x, atol=1e-12)
    np.testing.assert_allclose(dw.averaged_v_double_prime(x, 1.0), 3 * x**2 - 1, atol=1e-12)
    np.testing.assert_allclose(dw.averaged_v_prime_sq(x, 1.0), (1 + x**2) * (7 + 6 * x**2 + x**4), rtol=1e-12)
    assert dw.averaged_v_prime_sq(0.0, 1.0) == 7.0


def test_quartic_unit_variance_forms():
    q = Quartic()
    u = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(q.averaged_v_prime(u, 1.0), 4 * u + u**3, atol=1e-12)
    np.testing.assert_allclose(q.averaged_v_double_prime(u, 1.0), 4 + 3 * u**2, atol=1e-12)
    np.testing.assert_allclose(q.averaged_v_prime_sq(u, 1.0), u**6 + 17 * u**4 + 58 * u**2 + 22, rtol=1e-12)


def test_bridge_variance_form():
    t = np.linspace(0.05, 0.95, 19)
    u = np.full_like(t, 0.7)
    s = t * (1 - t)
    np.testing.assert_allclose(DoubleWell().averaged_v_double_prime(u, s), 3 * u**2 + 3 * s - 4)


def test_zero_variance_is_pointwise():
    for potential in (Quartic(), DoubleWell()):
        np.testing.assert_allclose(potential.averaged_v_prime(U, 0.0), potential.v_prime(U))


def test_negative_variance_rejected():
    with pytest.raises(DomainError):
        Quartic().averaged_v_prime(0.0, -0.1)
    with pytest.raises(DomainError):
        DoubleWell().averaged_v_double_prime(np.zeros(3), np.array([0.1, -1e-3, 0.2]))


def test_linear_force_averages():
    lf = LinearForce(2.5)
    assert lf.averaged_v_prime(3.0, 0.4) == 2.5
    assert lf.averaged_v_double_prime(3.0, 0.4) == 0.0
    assert lf.averaged_v_prime_sq(-1.0, 0.4) == 6.25


def test_registry_and_lookup():
    assert set(BUILTIN_POTENTIALS) == {"quartic", "double_well", "linear_force"}
    assert isinstance(get_potential("quartic"), Quartic)
    assert get_potential("linear_force", {"c": 2.0}).v_prime(3.0) == 2.0


def test_lookup_errors():
    with pytest.raises(ConfigError, match="unknown potential"):
        get_potential("sextic")
    with pytest.raises(ConfigError, match="bad parameters"):
        get_potential("quartic", {"c": 1.0})
