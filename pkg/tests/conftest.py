import itertools
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest


def enumerate_occupation(m):
    """Exact law of R_m by walking every one of the 4**m step sequences."""
    counts = Counter()
    for eps in itertools.product((-1, 1), repeat=2 * m):
        s_prev, s, t = 0, 0, 0
        for e in eps:
            s += e
            t += s_prev >= 0 and s >= 0
            s_prev = s
        counts[t // 2] += 1
    total = 4**m
    return [Fraction(counts[k], total) for k in range(m + 1)]


def enumerate_returns(j):
    """P(S_{2j} = 0) by enumeration."""
    hits = sum(1 for eps in itertools.product((-1, 1), repeat=2 * j) if sum(eps) == 0)
    return Fraction(hits, 4**j)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_rational_f(rng, m, size=None):
    """Random rational test function on {-1..m} with f(-1) = 0."""
    nums = rng.integers(-50, 51, m + 1)
    dens = rng.integers(1, 20, m + 1)
    vals = [Fraction(int(a), int(b)) for a, b in zip(nums, dens)]
    return lambda k: Fraction(0) if k < 0 else vals[k]
