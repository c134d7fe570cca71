import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import projsplit as ps


@pytest.fixture
def rng():
    return np.random.default_rng(20240812)


@pytest.fixture
def bilinear():
    return ps.make_bilinear_game(1, 1, scale=1.0)


@pytest.fixture
def noisy_bilinear():
    return ps.make_bilinear_game(1, 1, scale=1.0, noise_sigma=0.1)


@pytest.fixture
def box_bilinear():
    """Constrained game with the known extended solution (0, 0, 0)."""
    return ps.make_box_constrained_bilinear(1, 1, scale=1.0, halfwidth=1.0)


@pytest.fixture(scope="session")
def small_drslr():
    dataset = ps.synthetic_drslr_dataset(m=20, d=6, seed=3)
    problem = ps.DrslrProblem(dataset=dataset)
    return problem


@pytest.fixture(scope="session")
def small_drslr_instance(small_drslr):
    return ps.make_drslr_instance(small_drslr, batch_size=10)
