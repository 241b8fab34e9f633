"""Shared fixtures: reference models, seeded generators and small Monte Carlo budgets."""

from pathlib import Path

import numpy as np
import pytest

import hypobound
from hypobound.core.estimator import McConfig
from hypobound.core.model import iterated_kolmogorov_structure, kolmogorov_structure, random_structure

DATA_DIR = Path(hypobound.__file__).parent / "data"


@pytest.fixture
def kolmogorov():
    return kolmogorov_structure()


@pytest.fixture
def iterated():
    return iterated_kolmogorov_structure(2, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def random_models():
    """Factory for a reproducible list of random models."""

    def build(count: int = 8, seed: int = 11, r_max: int = 3, max_block: int = 3):
        gen = np.random.default_rng(seed)
        return [random_structure(gen, r_max=r_max, max_block=max_block) for _ in range(count)]

    return build


@pytest.fixture
def mc():
    return McConfig(n=100_000, seed=12345)


@pytest.fixture
def small_mc():
    return McConfig(n=5_000, seed=99)


@pytest.fixture
def data_dir():
    return DATA_DIR
