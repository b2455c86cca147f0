"""Monte Carlo for the symmetric random walk and its occupation time.

Seeding rule: path ``i`` of a run with ``master_seed`` reads its steps from a
Philox-4x64 stream keyed by ``master_seed`` starting at counter
``i * stride``, where ``stride = ceil(n_steps / 256)`` counter blocks (each
block yields four 64-bit words, i.e. 256 step bits).  Step ``j`` is bit ``j``
of that stream (little-endian), mapped to ``+1`` for a set bit and ``-1``
otherwise.  Paths are therefore independent of how the batch is split into
blocks or threads, and a single path can be regenerated on its own.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chung_feller import _check_m
from .exceptions import ResourceError

RNG_NAME = "numpy Philox4x64-10, key=master_seed, counter=path_index*stride"

# Paths per block; bounded further so one block's step matrix stays small.
BLOCK_PATHS = 1 << 15
BLOCK_BYTES = 1 << 26
MAX_HIST_BINS = 10**7

CONVENTIONS = ("nonneg", "nonpos")


def _stride(n_steps: int) -> int:
    return -(-n_steps // 256)


def _steps(master_seed: int, start: int, count: int, n_steps: int) -> np.ndarray:
    """Step matrix ``(count, n_steps)`` of +-1 for paths ``start .. start+count-1``."""
    stride = _stride(n_steps)
    gen = np.random.Philox(key=int(master_seed) & (2**64 - 1), counter=start * stride)
    words = gen.random_raw(count * stride * 4).reshape(count, stride * 4)
    bits = np.unpackbits(words.view(np.uint8), axis=1, bitorder="little")[:, :n_steps]
    return bits.astype(np.int8) * 2 - 1


def indicators(eps: np.ndarray, convention: str = "nonneg") -> np.ndarray:
    """``X_j = 1{S_{j-1} >= 0, S_j >= 0}`` per path (``<= 0`` for ``nonpos``)."""
    eps = np.atleast_2d(np.asarray(eps))
    s = np.cumsum(eps, axis=1, dtype=np.int32)
    prev = np.concatenate([np.zeros((s.shape[0], 1), dtype=np.int32), s[:, :-1]], axis=1)
    if convention == "nonneg":
        return (prev >= 0) & (s >= 0)
    if convention == "nonpos":
        return (prev <= 0) & (s <= 0)
    raise ValueError(f"convention must be one of {CONVENTIONS}")


@dataclass(frozen=True)
class PathCheck:
    pairs_equal: bool   # X_{2j-1} == X_{2j} for all j
    t_even: bool


def occupation(eps, convention: str = "nonneg"):
    """``(T_m, R_m, PathCheck)`` for one path given its ``2m`` steps."""
    eps = np.asarray(eps)
    if eps.ndim != 1 or eps.size % 2 or eps.size == 0:
        raise ValueError("need an even, positive number of steps")
    x = indicators(eps, convention)[0]
    t = int(x.sum())
    check = PathCheck(bool(np.all(x[0::2] == x[1::2])), t % 2 == 0)
    return t, t // 2, check


def simulate_path(m: int, seed: int, path_index: int = 0, convention: str = "nonneg"):
    """Draw path ``path_index`` of the stream ``seed`` and return ``(R_m, PathCheck)``."""
    m = _check_m(m)
    _, r, check = occupation(_steps(seed, path_index, 1, 2 * m)[0], convention)
    return r, check


@dataclass(frozen=True)
class WalkBatch:
    """Histogram of R_m over ``n_paths`` simulated paths plus lemma checks."""

    m: int
    n_paths: int
    master_seed: int
    counts: np.ndarray
    lemma_a_violations: int
    lemma_b_violations: int
    convention: str = "nonneg"
    rng: str = RNG_NAME
    # Odd-time extension (2m + 1 steps), filled only when requested.
    odd_counts: np.ndarray | None = field(default=None, repr=False)
    odd_max_gap: float | None = None

    @property
    def violation_flags(self) -> dict[str, bool]:
        return {"pairs_equal": self.lemma_a_violations == 0, "t_even": self.lemma_b_violations == 0}

    @property
    def empirical_pmf(self) -> np.ndarray:
        return self.counts / self.n_paths

    def mean_w(self) -> float:
        return float(np.dot(np.arange(self.m + 1), self.counts)) / (self.m * self.n_paths)

    def tv_to(self, probs) -> float:
        """Total-variation distance between the empirical pmf and ``probs``."""
        return 0.5 * float(np.abs(self.empirical_pmf - np.asarray(probs, dtype=float)).sum())


def _block(m, master_seed, start, count, convention, odd):
    n_steps = 2 * m + 1 if odd else 2 * m
    eps = _steps(master_seed, start, count, n_steps)
    x = indicators(eps, convention)
    even = x[:, : 2 * m]
    t = even.sum(axis=1)
    out = {
        "counts": np.bincount(t // 2, minlength=m + 1),
        "a": int(np.count_nonzero(np.any(even[:, 0::2] != even[:, 1::2], axis=1))),
        "b": int(np.count_nonzero(t % 2)),
    }
    if odd:
        t_odd = x.sum(axis=1)
        out["odd_counts"] = np.bincount(t_odd, minlength=2 * m + 2)
        gap = np.abs(t_odd / (2 * m + 1) - t / (2 * m))
        out["odd_max_gap"] = float(gap.max())
    return out


def simulate_batch(m: int, n_paths: int, master_seed: int, threads: int = 1,
                   convention: str = "nonneg", odd: bool = False) -> WalkBatch:
    """Simulate ``n_paths`` walks of length ``2m`` (``2m + 1`` when ``odd``).

    The histogram depends only on ``(m, n_paths, master_seed, convention)``,
    never on ``threads``.
    """
    m = _check_m(m)
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    if 2 * m + 2 > MAX_HIST_BINS:
        raise ResourceError(f"histogram for m={m} exceeds {MAX_HIST_BINS} bins")
    per_block = max(1, min(BLOCK_PATHS, BLOCK_BYTES // (8 * (2 * m + 1))))
    starts = range(0, n_paths, per_block)
    job = lambda s: _block(m, master_seed, s, min(per_block, n_paths - s), convention, odd)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(job, starts))
    else:
        parts = [job(s) for s in starts]
    counts = sum(p["counts"] for p in parts)
    extra = {}
    if odd:
        extra["odd_counts"] = sum(p["odd_counts"] for p in parts)
        extra["odd_max_gap"] = max(p["odd_max_gap"] for p in parts)
    return WalkBatch(m, n_paths, int(master_seed), counts,
                     sum(p["a"] for p in parts), sum(p["b"] for p in parts), convention, **extra)


def symmetry_check(batch_pos: WalkBatch, batch_neg: WalkBatch, reverse: bool = False) -> float:
    """TV distance between the histograms of ``R_m`` and its sign-flipped twin.

    With ``reverse`` the second histogram is read backwards (``k -> m - k``),
    which turns the pathwise identity ``R~ = m - R`` into an exact match when
    both batches share their seed.
    """
    if batch_pos.m != batch_neg.m:
        raise ValueError(f"batches have different m ({batch_pos.m} vs {batch_neg.m})")
    if batch_pos.n_paths != batch_neg.n_paths:
        raise ValueError("batches have different n_paths")
    other = batch_neg.counts[::-1] if reverse else batch_neg.counts
    return 0.5 * float(np.abs(batch_pos.counts - other).sum()) / batch_pos.n_paths


def mean_tolerance(n_paths: int, k_sigma: float = 5.0) -> float:
    """Tolerance ``k_sigma / sqrt(n)`` for the empirical mean of ``W_m``."""
    return k_sigma / math.sqrt(n_paths)
