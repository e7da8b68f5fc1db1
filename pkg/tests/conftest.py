import random
from fractions import Fraction

import pytest

from uniassign.core import (
    AssignmentMatrix,
    Matching,
    Profile,
    UniformPreference,
    enumerate_uniform_prefs,
)

F = Fraction


def random_pref(rng: random.Random, n: int) -> UniformPreference:
    inner = sorted(rng.sample(range(1, n), rng.randint(0, n - 1))) if n > 1 else []
    return UniformPreference(n=n, boundaries=tuple(inner) + (n,))


def random_profile(rng: random.Random, n: int) -> Profile:
    return Profile(prefs=tuple(random_pref(rng, n) for _ in range(n)))


def random_doubly_stochastic(rng: random.Random, n: int, terms: int = 6) -> AssignmentMatrix:
    """Random rational lottery over permutations, recombined exactly."""
    weights = [rng.randint(1, 12) for _ in range(terms)]
    total = sum(weights)
    rows = [[F(0)] * n for _ in range(n)]
    for w in weights:
        perm = list(range(n))
        rng.shuffle(perm)
        share = F(w, total)
        for i, j in enumerate(perm):
            rows[i][j] += share
    return AssignmentMatrix.from_rows(rows)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240917)
