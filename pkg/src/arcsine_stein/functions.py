"""Piecewise-linear test functions with known kinks.

Lipschitz test functions are the natural input of the Stein solver and of the
Wasserstein lower bound.  Exposing the kink locations lets the quadrature
split its panels there and integrate each smooth piece to full precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-linear function through ``(knots[i], values[i])``.

    Outside ``[knots[0], knots[-1]]`` the function is extended by constants,
    which keeps the Lipschitz constant unchanged.
    """

    knots: np.ndarray
    values: np.ndarray
    slopes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if knots.ndim != 1 or knots.shape != values.shape or knots.size < 2:
            raise ValueError("knots and values must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "slopes", np.diff(values) / np.diff(knots))

    def __call__(self, x):
        return np.interp(x, self.knots, self.values)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(float(k) for k in self.knots)

    @property
    def lipschitz(self) -> float:
        return float(np.max(np.abs(self.slopes)))

    def derivative(self, x):
        """Right derivative; zero outside the knot range."""
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.knots, x, side="right") - 1
        inside = (idx >= 0) & (idx < self.slopes.size)
        out = np.zeros_like(x)
        out[inside] = self.slopes[idx[inside]]
        return out

    @classmethod
    def random(cls, rng: np.random.Generator, max_interior: int = 5, lipschitz: float = 1.0):
        """Random Lipschitz function on [0, 1] with at most ``max_interior`` interior knots.

        Slopes are drawn uniformly in ``[-lipschitz, lipschitz]``.
        """
        n_inner = int(rng.integers(0, max_interior + 1))
        inner = np.sort(rng.uniform(0.02, 0.98, size=n_inner))
        knots = np.concatenate([[0.0], inner, [1.0]])
        slopes = rng.uniform(-lipschitz, lipschitz, size=knots.size - 1)
        start = rng.uniform(-1.0, 1.0)
        values = np.concatenate([[start], start + np.cumsum(slopes * np.diff(knots))])
        return cls(knots, values)
