import json
import os
import sys

import numpy as np
import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)

from rmgauss.function_space import Grid  # noqa: E402
from rmgauss.objective import Problem  # noqa: E402
from rmgauss.potentials import DoubleWell, Quartic  # noqa: E402

CONFIG_DIR = os.path.join(ROOT, "configs")
CUSTOM_POTENTIALS_DIR = os.path.join(ROOT, "custom_potentials")
SQRT_09 = float(np.sqrt(0.9))


@pytest.fixture
def grid_small():
    return Grid(9)


@pytest.fixture
def grid_199():
    return Grid(199)


@pytest.fixture
def quartic_scalar():
    return Problem.scalar(Quartic(), 0.1)


@pytest.fixture
def dblwell_scalar():
    return Problem.scalar(DoubleWell(), 0.1)


@pytest.fixture
def quartic_path():
    return Problem.path(Quartic(), 0.01, Grid(99), 0.0, 2.0)


@pytest.fixture
def dblwell_path_200():
    return Problem.path(DoubleWell(), 0.01, Grid(200), 0.0, 2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def scalar_config(**rm_overrides):
    rm = {
        "policy": "expanding",
        "region": {"shape": "interval", "lo": -1.0, "hi": 1.0},
        "restart": {"kind": "constant", "value": 0.5},
        "n_iters": 2000,
        "seed": 1,
        "trace": {"record_every": 10},
    }
    rm.update(rm_overrides)
    return {
        "name": "scalar_test",
        "problem": {"mode": "scalar", "potential": "quartic", "epsilon": 0.1},
        "rm": rm,
    }


def path_config(potential="quartic", n_interior=19, pipeline=("rm", "bvp"), **rm_overrides):
    rm = {
        "policy": "expanding",
        "region": {"shape": "ball", "radius": 10.0},
        "restart": {"kind": "zero"},
        "n_iters": 500,
        "seed": 1,
        "trace": {"record_every": 50, "store_states": False},
    }
    rm.update(rm_overrides)
    return {
        "name": "path_test",
        "pipeline": list(pipeline),
        "problem": {
            "mode": "path", "potential": potential, "epsilon": 0.01,
            "n_interior": n_interior, "m_minus": 0.0, "m_plus": 2.0,
        },
        "rm": rm,
        "oracle": {"spectrum_k": 3},
    }


@pytest.fixture
def write_config(tmp_path):
    def _write(data, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)

    return _write
