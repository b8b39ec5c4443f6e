import numpy as np
import pytest

from rmgauss.errors import DomainError, ModeError
from rmgauss.function_space import Grid
from rmgauss.gaussian import GaussianSampler, SamplerMode

N_SAMPLES = 100_000


def test_mode_and_grid_must_agree():
    with pytest.raises(ModeError):
        GaussianSampler(SamplerMode.BRIDGE, 0)
    with pytest.raises(ModeError):
        GaussianSampler(SamplerMode.SCALAR, 0, Grid(5))


@pytest.mark.parametrize("seed", [-1, 2**64])
def test_seed_must_be_64_bit(seed):
    with pytest.raises(DomainError):
        GaussianSampler.scalar(seed)


def test_wrong_draw_kind_raises():
    with pytest.raises(ModeError):
        GaussianSampler.bridge(Grid(5), 0).sample_scalar()
    with pytest.raises(ModeError):
        GaussianSampler.scalar(0).sample_bridge()


def test_scalar_stream_reproducible():
    a = GaussianSampler.scalar(42)
    b = GaussianSampler.scalar(42)
    draws_a = [a.sample_scalar() for _ in range(10_000)]
    draws_b = [b.sample_scalar() for _ in range(10_000)]
    assert draws_a == draws_b
    assert draws_a != [GaussianSampler.scalar(43).sample_scalar() for _ in range(10_000)]


def test_bridge_stream_reproducible():
    grid = Grid(19)
    a = GaussianSampler.bridge(grid, 7)
    b = GaussianSampler.bridge(grid, 7)
    for _ in range(50):
        np.testing.assert_array_equal(a.sample_bridge().values, b.sample_bridge().values)


@pytest.mark.parametrize("mode", ["scalar", "bridge"])
def test_block_draws_continue_the_stream(mode):
    grid = Grid(9) if mode == "bridge" else None
    one_by_one = GaussianSampler(mode, 5, grid)
    blocked = GaussianSampler(mode, 5, grid)

    if mode == "scalar":
        singles = np.array([one_by_one.sample_scalar() for _ in range(10_000)])
    else:
        singles = np.array([one_by_one.sample_bridge().values for _ in range(20_000)])
    block = np.concatenate([blocked.sample_block(3), blocked.sample_block(len(singles) - 3)])
    np.testing.assert_array_equal(block, singles)


def test_scalar_moments():
    z = GaussianSampler.scalar(2024).sample_block(N_SAMPLES)
    se_mean = 1.0 / np.sqrt(N_SAMPLES)
    se_var = np.sqrt(2.0 / N_SAMPLES)
    assert abs(z.mean()) < 3 * se_mean
    assert abs(z.var() - 1.0) < 3 * se_var


def test_bridge_moments():
    grid = Grid(9)
    xi = GaussianSampler.bridge(grid, 2024).sample_block(N_SAMPLES)
    t = grid.nodes
    var = t * (1.0 - t)

    # per-node checks use 4 standard errors since nine nodes are tested at once
    assert np.all(np.abs(xi.mean(axis=0)) < 4 * np.sqrt(var / N_SAMPLES))
    assert np.all(np.abs(xi.var(axis=0) - var) < 4 * var * np.sqrt(2.0 / N_SAMPLES))

    cov = np.cov(xi, rowvar=False)
    for i, j in [(0, 8), (2, 6), (4, 5)]:
        expected = min(t[i], t[j]) - t[i] * t[j]
        se = np.sqrt((var[i] * var[j] + expected**2) / N_SAMPLES)
        assert abs(cov[i, j] - expected) < 4 * se


def test_bridge_higher_moments():
    grid = Grid(9)
    xi = GaussianSampler.bridge(grid, 77).sample_block(N_SAMPLES)
    t = grid.nodes
    var = t * (1.0 - t)

    # odd moments vanish: Var(xi^3) = 15 var^3
    assert np.all(np.abs((xi**3).mean(axis=0)) < 4 * np.sqrt(15.0 * var**3 / N_SAMPLES))

    # at t = 1/2: E xi^4 = 3 (1/4)^2 = 0.1875, Var(xi^4) = (105 - 9) / 256
    mid = xi[:, 4]
    assert t[4] == pytest.approx(0.5)
    assert abs((mid**4).mean() - 0.1875) < 4 * np.sqrt(96.0 / 256.0 / N_SAMPLES)

    # fourth moments at every node follow 3 var^2
    fourth_se = np.sqrt(96.0 * var**4 / N_SAMPLES)
    assert np.all(np.abs((xi**4).mean(axis=0) - 3.0 * var**2) < 4 * fourth_se)
