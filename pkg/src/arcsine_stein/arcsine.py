"""The arcsine law Beta(1/2, 1/2) on [0, 1].

Every integral against the arcsine law is taken after substituting
``x = sin(theta)**2``.  Under that change of variables the law becomes the
uniform law on ``(0, pi/2)`` scaled by ``2/pi``, so the integrands are bounded
and a fixed composite Gauss-Legendre rule is accurate to machine precision
for smooth functions.  Kinks of piecewise-smooth integrands are honoured by
splitting panels at the given breakpoints.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

from .exceptions import NumericError

HALF_PI = 0.5 * math.pi

# Composite Gauss-Legendre rule on (0, pi/2).
DEFAULT_PANELS = 64
DEFAULT_ORDER = 16

# Value returned by pdf at the endpoints, where the density is unbounded.
# Never used inside an integral.
ENDPOINT_DENSITY = math.inf


def _scalar_or_array(x, out):
    if np.ndim(x) == 0:
        return float(out)
    return out


def pdf(x):
    """Arcsine density ``1 / (pi * sqrt(x (1 - x)))`` on (0, 1), zero outside.

    Returns ``ENDPOINT_DENSITY`` at 0 and 1.
    """
    xa = np.asarray(x, dtype=float)
    out = np.zeros_like(xa)
    inside = (xa > 0.0) & (xa < 1.0)
    xi = xa[inside]
    out[inside] = 1.0 / (math.pi * np.sqrt(xi * (1.0 - xi)))
    out[(xa == 0.0) | (xa == 1.0)] = ENDPOINT_DENSITY
    return _scalar_or_array(x, out)


def angle(x):
    """``arcsin(sqrt(x))`` for x in [0, 1], accurate near both endpoints."""
    return np.arctan2(np.sqrt(x), np.sqrt(1.0 - x))


def cdf(x):
    """``(2/pi) arcsin(sqrt(x))``, clamped to 0 below 0 and 1 above 1."""
    xa = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    out = angle(xa) / HALF_PI
    return _scalar_or_array(x, out)


def _check_unit(name, xa):
    if np.any(~np.isfinite(xa)) or np.any(xa < 0.0) or np.any(xa > 1.0):
        raise ValueError(f"{name}: argument must lie in [0, 1]")


def cdf_antiderivative(x):
    """Integral of the CDF from 0 to ``x``.

    Closed form ``((2x - 1) arcsin(sqrt(x)) + sqrt(x (1 - x))) / pi``;
    equals 0 at 0 and 1/2 at 1.
    """
    xa = np.asarray(x, dtype=float)
    _check_unit("cdf_antiderivative", xa)
    out = ((2.0 * xa - 1.0) * angle(xa) + np.sqrt(xa * (1.0 - xa))) / math.pi
    return _scalar_or_array(x, out)


def quantile(c):
    """Inverse CDF ``sin(pi c / 2)**2`` for ``c`` in [0, 1]."""
    ca = np.asarray(c, dtype=float)
    _check_unit("quantile", ca)
    out = np.sin(HALF_PI * ca) ** 2
    return _scalar_or_array(c, out)


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def theta_edges(n_panels: int = DEFAULT_PANELS, breakpoints: Iterable[float] = ()) -> np.ndarray:
    """Panel edges on [0, pi/2]: a uniform split refined at the images of ``breakpoints``."""
    if n_panels < 1:
        raise ValueError("n_panels must be positive")
    edges = np.linspace(0.0, HALF_PI, n_panels + 1)
    bps = np.asarray([b for b in breakpoints if 0.0 < b < 1.0], dtype=float)
    if bps.size:
        edges = np.union1d(edges, angle(bps))
        keep = np.concatenate([[True], np.diff(edges) > 1e-14])
        edges = edges[keep]
        edges[-1] = HALF_PI
    return edges


def evaluate(h: Callable, x: np.ndarray) -> np.ndarray:
    """Evaluate ``h`` on an array, falling back to elementwise calls."""
    try:
        vals = np.asarray(h(x), dtype=float)
        if vals.shape != x.shape:
            vals = np.broadcast_to(vals, x.shape).astype(float)
    except (TypeError, ValueError):
        vals = np.array([float(h(xi)) for xi in x.ravel()]).reshape(x.shape)
    if not np.all(np.isfinite(vals)):
        bad = x[~np.isfinite(vals)]
        raise NumericError("test function returned a non-finite value", at=float(bad.flat[0]))
    return vals


def panel_integrals(g: Callable, edges: np.ndarray, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Gauss-Legendre integral of ``g`` (a function of theta) over each panel."""
    t, w = gauss_legendre(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = mid[:, None] + half[:, None] * t[None, :]
    return half * (evaluate(g, nodes) @ w)


def expect(h: Callable, n_panels: int = DEFAULT_PANELS, order: int = DEFAULT_ORDER,
           breakpoints: Iterable[float] | None = None) -> float:
    """Expectation of ``h`` under the arcsine law.

    Computed as ``(2/pi) * int_0^{pi/2} h(sin(theta)**2) dtheta``.  ``h`` should
    accept numpy arrays.  If ``breakpoints`` is omitted, a ``breakpoints``
    attribute on ``h`` is used when present.
    """
    if breakpoints is None:
        breakpoints = getattr(h, "breakpoints", ())
    edges = theta_edges(n_panels, breakpoints)
    pieces = panel_integrals(lambda th: h(np.sin(th) ** 2), edges, order)
    return math.fsum(pieces) / HALF_PI


class ArcsineMeasure:
    """Parameter-free handle on the arcsine law bundling its primitives."""

    mean = 0.5
    median = 0.5

    pdf = staticmethod(pdf)
    cdf = staticmethod(cdf)
    cdf_antiderivative = staticmethod(cdf_antiderivative)
    quantile = staticmethod(quantile)
    expect = staticmethod(expect)

    def __repr__(self):
        return "ArcsineMeasure()"
