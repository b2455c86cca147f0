"""Exact law of the half occupation time R_m via the Chung-Feller theorem.

``P(R_m = k) = u_{2k} u_{2m-2k}`` with ``u_{2j} = C(2j, j) / 4**j`` the
probability that the walk is back at zero at time ``2j``.  Some statements of
the theorem print the normalisation as ``2**-j``; only ``4**-j`` gives a
probability, so that is what is used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import ResourceError

# Largest m for which build_pmf is allowed; beyond this use pmf_float.
MAX_EXACT_M = 2000
# Float path memory budget, in number of atoms.
MAX_FLOAT_M = 10**7


@dataclass(frozen=True)
class ExactPmf:
    """Law of R_m on {0, ..., m} as exact rationals plus a float view."""

    m: int
    probs: tuple[Fraction, ...]
    float_view: np.ndarray

    def __post_init__(self):
        if len(self.probs) != self.m + 1:
            raise ValueError(f"expected {self.m + 1} probabilities, got {len(self.probs)}")
        fv = np.asarray(self.float_view, dtype=float)
        fv.setflags(write=False)
        object.__setattr__(self, "float_view", fv)

    def __getitem__(self, k: int) -> Fraction:
        """``p(k)``, zero off the support (so ``p(m + 1) == 0``)."""
        if 0 <= k <= self.m:
            return self.probs[k]
        return Fraction(0)

    def __len__(self):
        return self.m + 1

    def cumulative(self) -> tuple[Fraction, ...]:
        out, acc = [], Fraction(0)
        for p in self.probs:
            acc += p
            out.append(acc)
        return tuple(out)

    def expectation(self, g) -> Fraction:
        """Exact ``E[g(R_m)]`` for rational-valued ``g``."""
        return sum((p * g(k) for k, p in enumerate(self.probs)), Fraction(0))

    def check_invariants(self):
        """Raise ``AssertionError`` unless normalisation, positivity and symmetry hold exactly."""
        assert sum(self.probs, Fraction(0)) == 1, "probabilities do not sum to 1"
        assert all(p > 0 for p in self.probs), "support is not all of {0..m}"
        assert all(self.probs[k] == self.probs[self.m - k] for k in range(self.m + 1)), \
            "p(k) != p(m - k)"


def return_probability(j: int) -> Fraction:
    """``u_{2j} = C(2j, j) / 4**j`` exactly.

    This is the probability that a walk sits at 0 after ``2j`` steps.  The
    normalisation ``2**-j`` that sometimes appears for this quantity is a
    misprint: it does not make the Chung-Feller law sum to one.
    """
    if j < 0:
        raise ValueError("j must be nonnegative")
    return Fraction(math.comb(2 * j, j), 4**j)


def central_binomials(n: int) -> list[int]:
    """``[C(0,0), C(2,1), ..., C(2n, n)]`` via ``C(2j,j) = (4j-2)/j * C(2j-2,j-1)``."""
    out = [1]
    for j in range(1, n + 1):
        out.append(out[-1] * (4 * j - 2) // j)
    return out


def _check_m(m):
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    return int(m)


def build_pmf(m: int) -> ExactPmf:
    m = _check_m(m)
    if m > MAX_EXACT_M:
        raise ResourceError(f"exact pmf limited to m <= {MAX_EXACT_M}, got m={m}; use pmf_float")
    b = central_binomials(m)
    denom = 4**m
    probs = tuple(Fraction(b[k] * b[m - k], denom) for k in range(m + 1))
    return ExactPmf(m, probs, np.array([float(p) for p in probs]))


def psi(pmf: ExactPmf, k: int) -> Fraction:
    """Discrete score ``(p(k+1) - p(k)) / p(k)`` in closed form.

    ``(2k - m + 1) / ((k + 1)(2(m - k) - 1))``; equals -1 at ``k = m``.
    """
    m = pmf.m if isinstance(pmf, ExactPmf) else _check_m(pmf)
    if not 0 <= k <= m:
        raise ValueError(f"k={k} outside [0, {m}]")
    return Fraction(2 * k - m + 1, (k + 1) * (2 * (m - k) - 1))


def c_weight(m: int, k: int) -> Fraction:
    """``c(k) = (k + 1)(2(m - k) - 1)`` on ``[-1, m]``.

    Nonzero on ``[0, m]``; ``c(-1) = 0``, which is harmless because test
    functions vanish at -1.
    """
    m = _check_m(m)
    if not -1 <= k <= m:
        raise ValueError(f"k={k} outside [-1, {m}]")
    return Fraction((k + 1) * (2 * (m - k) - 1))


def pmf_float(m: int, max_m: int = MAX_FLOAT_M) -> np.ndarray:
    """Float pmf of R_m for large m.

    ``p(0) = u_{2m}`` is computed as ``exp(sum log(1 - 1/(2j)))`` with
    compensated summation; then ``p(k+1) = p(k) (1 + psi(k))`` where
    ``1 + psi(k)`` is the integer ratio ``(2k+1)(m-k) / c(k)``.  The first
    half is built by the recurrence and mirrored, so the result is exactly
    symmetric.
    """
    m = _check_m(m)
    if m > max_m:
        raise ResourceError(f"m={m} exceeds the float pmf budget max_m={max_m}")
    j = np.arange(1, m + 1, dtype=float)
    p0 = math.exp(math.fsum(np.log1p(-0.5 / j)))
    half = m // 2
    k = np.arange(half, dtype=np.int64)
    c = (k + 1) * (2 * (m - k) - 1)
    ratio = ((2 * k + 1) * (m - k)) / c.astype(float)
    first = np.empty(half + 1)
    first[0] = p0
    first[1:] = p0 * np.cumprod(ratio)
    out = np.empty(m + 1)
    out[: half + 1] = first
    out[m - half:] = first[::-1]
    return out
