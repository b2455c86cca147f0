"""Wasserstein-1 distance between a discrete law on [0, 1] and the arcsine law.

In one dimension ``d_W(mu, nu) = int |F_mu - F_nu|``.  Between consecutive
atoms the step CDF is a constant level ``c``; the arcsine CDF crosses it once,
at ``quantile(c)``, and each side integrates in closed form through the CDF
antiderivative ``G``.  The Lip(1) supremum is kept as an independent lower
bound, and a midpoint rule as a brute-force upper-side oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .arcsine import cdf, cdf_antiderivative, evaluate, expect, quantile
from .chung_feller import ExactPmf
from .functions import PiecewiseLinear


@dataclass(frozen=True)
class StepCdf:
    """Right-continuous step CDF with jumps at ``atoms``."""

    atoms: np.ndarray
    cum: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        cum = np.asarray(self.cum, dtype=float)
        if atoms.ndim != 1 or atoms.shape != cum.shape or atoms.size == 0:
            raise ValueError("atoms and cum must be nonempty 1-d arrays of equal length")
        if np.any(np.diff(atoms) <= 0) or atoms[0] < 0.0 or atoms[-1] > 1.0:
            raise ValueError("atoms must be strictly increasing inside [0, 1]")
        if np.any(np.diff(cum) < 0) or cum[0] < 0.0 or abs(cum[-1] - 1.0) > 1e-12:
            raise ValueError("cum must be nondecreasing, nonnegative and end at 1")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "cum", np.minimum(cum, 1.0))

    @classmethod
    def from_pmf(cls, pmf: ExactPmf) -> "StepCdf":
        """Law of ``W_m = R_m / m``; cumulative sums taken exactly."""
        atoms = np.arange(pmf.m + 1) / pmf.m
        return cls(atoms, np.array([float(c) for c in pmf.cumulative()]))

    @classmethod
    def from_probs(cls, atoms, probs) -> "StepCdf":
        atoms = np.asarray(atoms, dtype=float)
        probs = np.asarray(probs, dtype=float)
        if np.any(probs < 0):
            raise ValueError("negative probability")
        keep = probs > 0
        cum = np.cumsum(probs[keep])
        if abs(cum[-1] - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {cum[-1]!r}, not 1")
        return cls(atoms[keep], cum / cum[-1])

    @property
    def probs(self) -> np.ndarray:
        return np.diff(self.cum, prepend=0.0)

    def __call__(self, x):
        idx = np.searchsorted(self.atoms, x, side="right") - 1
        return np.where(idx >= 0, self.cum[np.clip(idx, 0, None)], 0.0)

    def reversed(self) -> "StepCdf":
        """Law of ``1 - X``."""
        return StepCdf.from_probs(1.0 - self.atoms[::-1], self.probs[::-1])


def as_step_cdf(law) -> StepCdf:
    """Accept an ExactPmf, a StepCdf, or a float pmf of R_m (read as W_m = R_m / m)."""
    if isinstance(law, StepCdf):
        return law
    if isinstance(law, ExactPmf):
        return StepCdf.from_pmf(law)
    probs = np.asarray(law, dtype=float)
    if probs.ndim != 1 or probs.size < 2:
        raise ValueError("malformed pmf: need a 1-d array of length m + 1 >= 2")
    m = probs.size - 1
    return StepCdf.from_probs(np.arange(m + 1) / m, probs)


def _segments(step: StepCdf):
    """Intervals ``[a, b]`` on which the step CDF equals ``level``."""
    a = np.concatenate([[0.0], step.atoms])
    b = np.concatenate([step.atoms, [1.0]])
    level = np.concatenate([[0.0], step.cum])
    keep = b > a
    return a[keep], b[keep], level[keep]


def w1_discrete_vs_arcsine(law) -> float:
    """``int_0^1 |F(x) - F_arcsine(x)| dx`` in closed form, piece by piece."""
    a, b, c = _segments(as_step_cdf(law))
    x = np.clip(quantile(np.clip(c, 0.0, 1.0)), a, b)
    Ga, Gb, Gx = cdf_antiderivative(a), cdf_antiderivative(b), cdf_antiderivative(x)
    below = c * (x - a) - (Gx - Ga)   # level above the arcsine CDF on [a, x]
    above = (Gb - Gx) - c * (b - x)   # arcsine CDF above the level on [x, b]
    return math.fsum(np.concatenate([below, above]))


def w1_quadrature_oracle(law, n_nodes: int = 10**6) -> float:
    """Composite midpoint rule for ``int |F - F_arcsine|`` with ``n_nodes`` cells."""
    if n_nodes < 100:
        raise ValueError("n_nodes must be at least 100")
    step = as_step_cdf(law)
    x = (np.arange(n_nodes) + 0.5) / n_nodes
    return math.fsum(np.abs(step(x) - cdf(x))) / n_nodes


def optimal_witness(law) -> PiecewiseLinear:
    """1-Lipschitz ``h`` attaining the supremum: ``h' = sign(F_arcsine - F)``."""
    step = as_step_cdf(law)
    a, b, c = _segments(step)
    cross = np.clip(quantile(np.clip(c, 0.0, 1.0)), a, b)
    knots = np.unique(np.concatenate([[0.0, 1.0], step.atoms, cross]))
    knots = knots[np.concatenate([[True], np.diff(knots) > 1e-13])]
    knots[-1] = 1.0
    mid = 0.5 * (knots[1:] + knots[:-1])
    slope = np.sign(cdf(mid) - step(mid))
    values = np.concatenate([[0.0], np.cumsum(slope * np.diff(knots))])
    return PiecewiseLinear(knots, values)


def lipschitz_lower_bound(law, h_family: Sequence[Callable], grid_n: int = 10**4,
                          lip_tol: float = 1e-9) -> float:
    """``max_h |E[h(X)] - nu(h)|`` over a family of 1-Lipschitz functions.

    Each member is checked for Lipschitz constant <= 1 on a uniform grid.
    """
    if len(h_family) == 0:
        raise ValueError("h_family must not be empty")
    step = as_step_cdf(law)
    grid = np.linspace(0.0, 1.0, grid_n + 1)
    best = 0.0
    for i, h in enumerate(h_family):
        bps = getattr(h, "breakpoints", ())
        xs = np.unique(np.concatenate([grid, np.asarray(bps, dtype=float)]))
        slopes = np.abs(np.diff(evaluate(h, xs)) / np.diff(xs))
        if slopes.max() > 1.0 + lip_tol:
            raise ValueError(f"h_family[{i}] is not 1-Lipschitz (slope {slopes.max():.6g})")
        e_law = math.fsum(step.probs * evaluate(h, step.atoms))
        best = max(best, abs(e_law - expect(h, breakpoints=bps)))
    return best
