import math
from fractions import Fraction

import numpy as np
import pytest

from arcsine_stein.chung_feller import (
    MAX_EXACT_M,
    ExactPmf,
    build_pmf,
    c_weight,
    central_binomials,
    pmf_float,
    psi,
    return_probability,
)
from arcsine_stein.exceptions import ResourceError

from conftest import enumerate_occupation, enumerate_returns


@pytest.mark.parametrize("j,expected", [(0, Fraction(1)), (1, Fraction(1, 2)), (2, Fraction(3, 8))])
def test_return_probability_values(j, expected):
    assert return_probability(j) == expected


@pytest.mark.parametrize("j", range(1, 7))
def test_return_probability_matches_enumeration(j):
    assert return_probability(j) == enumerate_returns(j)


def test_return_probability_negative():
    with pytest.raises(ValueError):
        return_probability(-1)


@pytest.mark.parametrize("m,expected", [
    (1, (Fraction(1, 2), Fraction(1, 2))),
    (2, (Fraction(3, 8), Fraction(1, 4), Fraction(3, 8))),
])
def test_build_pmf_small(m, expected):
    assert build_pmf(m).probs == expected


@pytest.mark.parametrize("m", range(1, 8))
def test_build_pmf_matches_path_enumeration(m):
    assert list(build_pmf(m).probs) == enumerate_occupation(m)


@pytest.mark.parametrize("m", [1, 5, 40, 333])
def test_p0_is_u2m(m):
    assert build_pmf(m)[0] == return_probability(m)


@pytest.mark.parametrize("m", [0, -3, 2.0, True])
def test_build_pmf_rejects_bad_m(m):
    with pytest.raises(ValueError):
        build_pmf(m)


def test_build_pmf_budget():
    with pytest.raises(ResourceError):
        build_pmf(MAX_EXACT_M + 1)


def test_invariants_and_float_view():
    for m in (1, 2, 17, 200):
        pmf = build_pmf(m)
        pmf.check_invariants()
        assert pmf.float_view.tolist() == [float(p) for p in pmf.probs]
        assert pmf[-1] == 0 and pmf[m + 1] == 0
    with pytest.raises(ValueError):
        pmf.float_view[0] = 1.0


def test_central_binomial_recurrence():
    b = central_binomials(500)
    for j in range(1, 501):
        assert Fraction(b[j]) == Fraction(4 * j - 2, j) * b[j - 1]
        assert b[j] == math.comb(2 * j, j)


class TestPsi:
    def test_examples(self):
        pmf = build_pmf(2)
        assert psi(pmf, 0) == Fraction(-1, 3)
        assert psi(pmf, 1) == Fraction(1, 2)
        assert psi(pmf, 2) == -1

    @pytest.mark.parametrize("m", [1, 3, 10, 77])
    def test_last_is_minus_one(self, m):
        assert psi(build_pmf(m), m) == -1

    @pytest.mark.parametrize("m", [1, 2, 9, 64, 200])
    def test_equals_difference_quotient(self, m):
        pmf = build_pmf(m)
        for k in range(m + 1):
            assert psi(pmf, k) == (pmf[k + 1] - pmf[k]) / pmf[k]

    def test_range(self):
        pmf = build_pmf(3)
        for k in (-1, 4):
            with pytest.raises(ValueError):
                psi(pmf, k)


class TestCWeight:
    def test_examples(self):
        assert c_weight(3, 0) == 5
        assert c_weight(3, 3) == -4
        assert c_weight(3, -1) == 0

    def test_nonzero_on_support(self):
        for m in range(1, 201):
            assert all(c_weight(m, k) != 0 for k in range(m + 1))

    @pytest.mark.parametrize("m", [1, 2, 7, 30])
    def test_identity(self, m):
        pmf = build_pmf(m)
        for k in range(m + 1):
            lhs = c_weight(m, k) * psi(pmf, k) + c_weight(m, k) - c_weight(m, k - 1)
            assert lhs == 2 * (Fraction(m, 2) - k)
            assert c_weight(m, k - 1) == 2 * k * (Fraction(m - k) + Fraction(1, 2))

    def test_range(self):
        with pytest.raises(ValueError):
            c_weight(3, 4)
        with pytest.raises(ValueError):
            c_weight(3, -2)


class TestPmfFloat:
    def test_small(self):
        assert pmf_float(1).tolist() == [0.5, 0.5]
        np.testing.assert_allclose(pmf_float(2), [0.375, 0.25, 0.375], rtol=1e-15)

    @pytest.mark.parametrize("m", [1, 2, 3, 10, 101, 999, 2000])
    def test_matches_exact(self, m):
        exact = build_pmf(m).float_view
        assert np.max(np.abs(pmf_float(m) / exact - 1)) <= 1e-12

    def test_normalised_large(self):
        assert abs(math.fsum(pmf_float(10**4)) - 1.0) <= 1e-12

    def test_symmetric(self):
        p = pmf_float(12345)
        assert np.array_equal(p, p[::-1])

    def test_budget(self):
        with pytest.raises(ResourceError):
            pmf_float(101, max_m=100)
