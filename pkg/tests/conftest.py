"""Shared fixtures: small instances with known optima and a seeded random corpus."""

import random
from typing import List

import pytest

from app.models.instance import Instance
from app.services.master_service import MasterConfig


def random_instance(rng: random.Random, n: int, W: int = 10, H: int = 10) -> Instance:
    dims = [(rng.randint(1, W), rng.randint(1, H)) for _ in range(n)]
    return Instance.from_dims(W, H, dims)


@pytest.fixture
def three_squares() -> Instance:
    """Three 6x6 items in a 10x10 bin; pairwise incompatible, optimum 3."""
    return Instance.from_dims(10, 10, [(6, 6), (6, 6), (6, 6)])


@pytest.fixture
def two_halves() -> Instance:
    """Two 5x10 items tiling a 10x10 bin."""
    return Instance.from_dims(10, 10, [(5, 10), (5, 10)])


@pytest.fixture
def one_big_two_small() -> Instance:
    return Instance.from_dims(10, 10, [(6, 6), (4, 4), (4, 4)])


@pytest.fixture
def small_corpus() -> List[Instance]:
    """Seeded random instances with n <= 6, small enough for brute force."""
    rng = random.Random(20240611)
    return [random_instance(rng, rng.randint(1, 6), W=rng.randint(4, 10), H=rng.randint(4, 10)) for _ in range(25)]


@pytest.fixture(scope="session")
def brute_force_corpus() -> List[Instance]:
    """Larger seeded corpus for end-to-end comparison against the exhaustive oracle."""
    rng = random.Random(20240612)
    return [random_instance(rng, rng.randint(1, 6), W=rng.randint(4, 10), H=rng.randint(4, 10)) for _ in range(300)]


@pytest.fixture
def fast_config() -> MasterConfig:
    return MasterConfig(time_limit=60.0, alpha=20, beta=20, eta=2, per_check_limit=2.0)
