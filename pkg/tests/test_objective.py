import math

import numpy as np
import pytest

from conftest import SQRT_09
from rmgauss.errors import DomainError, GridMismatchError, ModeError
from rmgauss.function_space import Grid, PathVector, ScalarState, apply_c0_inverse_array, norm_h1
from rmgauss.gaussian import GaussianSampler
from rmgauss.objective import (
    Problem,
    drift,
    evaluate_oracle,
    kl_estimate,
    kl_samples,
    noisy_oracle,
    oracle_batch,
    second_moment_bound,
    second_variation_diag,
)
from rmgauss.potentials import DoubleWell, LinearForce, Quartic


def test_problem_validation():
    with pytest.raises(DomainError):
        Problem.scalar(Quartic(), 0.0)
    with pytest.raises(ModeError):
        Problem("scalar", Quartic(), 0.1, Grid(5))
    with pytest.raises(ModeError):
        Problem("path", Quartic(), 0.1)
    with pytest.raises(DomainError):
        Problem.path(Quartic(), 0.1, Grid(5), m0=np.zeros(4))


def test_default_reference_mean_is_linear(quartic_path):
    np.testing.assert_allclose(quartic_path.m0, 2.0 * quartic_path.grid.nodes)
    full = quartic_path.m0_with_boundary()
    assert full[0] == 0.0 and full[-1] == 2.0


def test_scalar_oracle_examples(quartic_scalar):
    assert evaluate_oracle(quartic_scalar, ScalarState(0.0), 0.0).value == 0.0
    assert evaluate_oracle(quartic_scalar, ScalarState(1.0), 0.0).value == pytest.approx(21.0)


def test_scalar_oracle_overflow_is_infinite(quartic_scalar):
    assert not evaluate_oracle(quartic_scalar, ScalarState(0.0), 1e200).is_finite()


def test_scalar_drift_closed_forms(quartic_scalar, dblwell_scalar):
    for x in (-1.0, 0.0, 0.3, 2.0):
        assert drift(quartic_scalar, ScalarState(x)).value == pytest.approx(10 * (4 * x + x**3) + x)
    assert drift(quartic_scalar, ScalarState(0.0)).value == 0.0
    for root in (SQRT_09, -SQRT_09, 0.0):
        assert abs(drift(dblwell_scalar, ScalarState(root)).value) < 1e-12


def test_state_checks(quartic_scalar, quartic_path):
    with pytest.raises(ModeError):
        drift(quartic_path, ScalarState(0.0))
    with pytest.raises(ModeError):
        drift(quartic_scalar, PathVector.zeros(Grid(3)))
    with pytest.raises(GridMismatchError):
        drift(quartic_path, PathVector.zeros(Grid(9)))
    with pytest.raises(ModeError):
        noisy_oracle(quartic_scalar, ScalarState(0.0), GaussianSampler.bridge(Grid(3), 0))


def test_scalar_drift_is_mean_of_oracle(quartic_scalar):
    n = 100_000
    x = ScalarState(0.3)
    samples = oracle_batch(quartic_scalar, x, GaussianSampler.scalar(11).sample_block(n))
    se = samples.std() / math.sqrt(n)
    assert abs(samples.mean() - drift(quartic_scalar, x).value) < 4 * se


def test_path_drift_is_mean_of_oracle():
    problem = Problem.path(DoubleWell(), 0.1, Grid(9), 0.0, 2.0)
    x = PathVector.from_function(problem.grid, lambda t: 0.5 * np.sin(np.pi * t))
    n = 100_000
    samples = oracle_batch(problem, x, problem.new_sampler(12).sample_block(n))
    se = samples.std(axis=0) / math.sqrt(n)
    assert np.all(np.abs(samples.mean(axis=0) - drift(problem, x).values) < 4 * se)


def test_noisy_oracle_consumes_one_draw(quartic_path):
    x = PathVector.zeros(quartic_path.grid)
    a = quartic_path.new_sampler(3)
    b = quartic_path.new_sampler(3)
    xi = b.sample_bridge()
    np.testing.assert_array_equal(noisy_oracle(quartic_path, x, a).values,
                                  evaluate_oracle(quartic_path, x, xi).values)
    np.testing.assert_array_equal(a.sample_bridge().values, b.sample_bridge().values)


def test_single_node_path_reduces_to_hand_computation():
    problem = Problem.path(DoubleWell(), 1.0, Grid(1), 0.0, 2.0)
    # t = 1/2: m0 = 1, s = 1/4, C0 = dt^2/2 = 1/8; u = 1.5 gives E[V'] = 3.375 + 1.125 - 6
    x = PathVector([0.5], problem.grid)
    assert drift(problem, x).values[0] == pytest.approx(-1.5 / 8.0 + 0.5)
    assert second_variation_diag(problem, x)[0] == pytest.approx(3 * 2.25 + 0.75 - 4)


def test_scalar_kl_estimate(quartic_scalar):
    n = 100_000
    values = kl_samples(quartic_scalar, ScalarState(0.0), GaussianSampler.scalar(5), n)
    se = values.std() / math.sqrt(n)
    assert abs(values.mean() - 12.5) < 4 * se


def test_double_well_kl_prefers_minimizer(dblwell_scalar):
    n = 100_000
    at_root = kl_estimate(dblwell_scalar, ScalarState(SQRT_09), GaussianSampler.scalar(9), n)
    at_saddle = kl_estimate(dblwell_scalar, ScalarState(0.0), GaussianSampler.scalar(9), n)
    assert at_root < at_saddle
    # exact values: eps^-1 (x^4 - 2x^2 + 11)/4 + x^2/2
    assert at_saddle == pytest.approx(27.5, rel=0.02)
    assert at_root == pytest.approx(25.475, rel=0.02)


def test_path_kl_difference_for_linear_potential():
    problem = Problem.path(LinearForce(3.0), 0.5, Grid(49), 0.0, 1.0)
    x = PathVector.from_function(problem.grid, lambda t: np.sin(np.pi * t))
    zero = PathVector.zeros(problem.grid)
    # with common draws the noise cancels: eps^-1 c sum(x) dt + |x|_H1^2 / 2
    diff = (kl_samples(problem, x, problem.new_sampler(1), 10)
            - kl_samples(problem, zero, problem.new_sampler(1), 10))
    expected = 2.0 * 3.0 * x.values.sum() * problem.grid.dt + 0.5 * norm_h1(x) ** 2
    np.testing.assert_allclose(diff, expected, rtol=1e-10)


def test_second_variation(quartic_scalar, dblwell_path_200):
    q = second_variation_diag(quartic_scalar, ScalarState(0.5))
    assert q.shape == (1,)
    assert q[0] == pytest.approx(10 * (4 + 3 * 0.25))

    x = PathVector.from_function(dblwell_path_200.grid, lambda t: 0.3 * np.sin(np.pi * t))
    t = dblwell_path_200.grid.nodes
    u = x.values + dblwell_path_200.m0
    np.testing.assert_allclose(second_variation_diag(dblwell_path_200, x), 100 * (3 * u**2 + 3 * t * (1 - t) - 4))


def test_scalar_second_moment_is_exact(quartic_scalar):
    n = 100_000
    x = ScalarState(0.3)
    squares = oracle_batch(quartic_scalar, x, GaussianSampler.scalar(21).sample_block(n)) ** 2
    se = squares.std() / math.sqrt(n)
    assert abs(squares.mean() - second_moment_bound(quartic_scalar, x)) < 4 * se


def test_path_second_moment_bound_holds(quartic_path):
    x = PathVector.from_function(quartic_path.grid, lambda t: 0.2 * np.sin(np.pi * t))
    rows = oracle_batch(quartic_path, x, quartic_path.new_sampler(4).sample_block(2000))
    mean_sq = np.mean([norm_h1(PathVector(r, quartic_path.grid)) ** 2 for r in rows])
    assert mean_sq <= second_moment_bound(quartic_path, x)


def test_scalar_drift_is_kl_gradient(dblwell_scalar):
    n, h = 50_000, 1e-4
    x = 0.3
    plus = kl_samples(dblwell_scalar, ScalarState(x + h), GaussianSampler.scalar(21), n)
    minus = kl_samples(dblwell_scalar, ScalarState(x - h), GaussianSampler.scalar(21), n)
    slopes = (plus - minus) / (2.0 * h)
    se = slopes.std() / math.sqrt(n)
    assert abs(slopes.mean() - drift(dblwell_scalar, ScalarState(x)).value) < 4 * se


def test_path_drift_is_kl_gradient_in_h1():
    problem = Problem.path(DoubleWell(), 0.1, Grid(9), 0.0, 2.0)
    grid = problem.grid
    x = PathVector.from_function(grid, lambda t: 0.5 * np.sin(np.pi * t))
    direction = PathVector.from_function(grid, lambda t: np.sin(2 * np.pi * t) + t * (1 - t))
    n, h = 50_000, 1e-4

    plus = kl_samples(problem, x + direction * h, problem.new_sampler(22), n)
    minus = kl_samples(problem, x - direction * h, problem.new_sampler(22), n)
    slopes = (plus - minus) / (2.0 * h)
    se = slopes.std() / math.sqrt(n)

    # <f(x), e>_H1 = dt f^T (-Delta) e
    along = grid.dt * drift(problem, x).values @ apply_c0_inverse_array(direction.values, grid)
    assert abs(slopes.mean() - along) < 4 * se + 1e-6
