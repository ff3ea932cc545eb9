import random

import pytest

from redistrib.core import BidProfile, enumerate_allocations


def random_int_profile(rng: random.Random, n: int, p: int, hi: int = 20) -> BidProfile:
    return BidProfile(tuple(tuple(rng.randint(0, hi) for _ in range(p))
                            for _ in range(n)))


def random_homogeneous_profile(rng: random.Random, n: int, p: int,
                               hi: int = 20) -> BidProfile:
    return BidProfile(tuple((rng.randint(0, hi),) * p for _ in range(n)))


def brute_force_value(profile: BidProfile):
    return max(a.value for a in enumerate_allocations(profile))


@pytest.fixture
def rng():
    return random.Random(20260826)
