"""Prime enumeration and the logarithmic integral.

Everything downstream sums over primes p <= x, so the sieve is segmented
(memory stays bounded by the segment size no matter how large the limit)
and returns numpy arrays that the race accumulators consume directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

__all__ = ["PrimeStream", "sieve_primes", "LiEvaluator"]


def _dense_sieve(limit: int) -> np.ndarray:
    """All primes < limit by a plain in-memory sieve (used for base primes)."""
    if limit <= 2:
        return np.empty(0, dtype=np.int64)
    is_p = np.ones(limit, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(limit - 1) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.flatnonzero(is_p).astype(np.int64)


@dataclass(frozen=True)
class PrimeStream:
    """Primes p < limit, streamed segment by segment in increasing order.

    `segment_size` counts odd integers per segment; memory use is bounded by
    it plus the base primes up to sqrt(limit).
    """

    limit: int
    segment_size: int = 1 << 20

    def __post_init__(self) -> None:
        if self.limit < 0:
            raise ValueError("limit must be >= 0")
        if self.segment_size < 16:
            raise ValueError("segment_size too small")

    def segments(self) -> Iterator[np.ndarray]:
        """Yield consecutive arrays of primes; concatenation covers [2, limit)."""
        limit = self.limit
        if limit <= 2:
            return
        base = _dense_sieve(math.isqrt(limit - 1) + 1)
        odd_base = base[base > 2]

        first = True
        span = 2 * self.segment_size
        low = 3
        while low < limit:
            high = min(low + span, limit)  # exclusive
            n_odd = (high - low + 1) // 2
            mask = np.ones(n_odd, dtype=bool)
            for p in odd_base.tolist():
                p2 = p * p
                if p2 >= high:
                    break
                start = max(p2, ((low + p - 1) // p) * p)
                if start % 2 == 0:
                    start += p
                if start < high:
                    mask[(start - low) // 2 :: p] = False
            seg = low + 2 * np.flatnonzero(mask).astype(np.int64)
            if first:
                seg = np.concatenate([np.array([2], dtype=np.int64), seg])
                first = False
            if seg.size:
                yield seg
            low = high
        if first and limit > 2:
            yield np.array([2], dtype=np.int64)

    def __iter__(self) -> Iterator[int]:
        for seg in self.segments():
            yield from seg.tolist()


def sieve_primes(limit: int, segment_size: int = 1 << 20) -> np.ndarray:
    """All primes < limit, increasing. limit < 2 gives an empty array."""
    parts = list(PrimeStream(limit, segment_size).segments())
    if not parts:
        return np.empty(0, dtype=np.int64)
    return np.concatenate(parts)


def _inv_log(t: np.ndarray) -> np.ndarray:
    return 1.0 / np.log(t)


@dataclass(frozen=True)
class LiEvaluator:
    """li(x) = integral of dt/log t from `lower_limit` (default 2, so li(2)=0).

    The lower limit 2 avoids the principal-value singularity at t=1; the
    constant offset is irrelevant to signs and densities but is fixed here so
    results are reproducible bit for bit.
    """

    lower_limit: float = 2.0
    quadrature_tolerance: float = 1e-10

    def li(self, x: float) -> float:
        if x < self.lower_limit:
            raise ValueError(f"li requires x >= {self.lower_limit}, got {x}")
        if x == self.lower_limit:
            return 0.0
        out = _adaptive_simpson_batch(
            np.array([self.lower_limit]),
            np.array([float(x)]),
            np.array([self.quadrature_tolerance]),
        )
        return float(out[0])

    def li_many(self, xs: np.ndarray) -> np.ndarray:
        """li at each point of a sorted array, by integrating gap by gap.

        Work is O(1) amortized per point: each consecutive gap is integrated
        once and the results are accumulated in extended precision.
        """
        xs = np.asarray(xs, dtype=np.float64)
        if xs.size == 0:
            return np.empty(0)
        if xs[0] < self.lower_limit:
            raise ValueError("points below the integration origin")
        if np.any(np.diff(xs) < 0):
            raise ValueError("points must be sorted ascending")
        lows = np.concatenate([[self.lower_limit], xs[:-1]])
        highs = xs
        gaps = highs - lows
        span = max(highs[-1] - self.lower_limit, 1.0)
        tol = self.quadrature_tolerance * np.maximum(gaps, 1e-30) / span
        pieces = _adaptive_simpson_batch(lows, highs, tol)
        return np.cumsum(pieces.astype(np.longdouble)).astype(np.float64)


def _adaptive_simpson_batch(a: np.ndarray, b: np.ndarray, tol: np.ndarray) -> np.ndarray:
    """Adaptive Simpson of 1/log t over many intervals at once.

    Classic bisection refinement with the |S2-S1|/15 error estimate, run on
    arrays of active subintervals instead of recursively. The error floor
    guards against chasing float noise on already-converged pieces.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = np.zeros(a.shape)
    live = b > a
    idx = np.flatnonzero(live)
    if idx.size == 0:
        return out
    lo, hi = a[idx], b[idx]
    mid = 0.5 * (lo + hi)
    f_lo, f_mid, f_hi = _inv_log(lo), _inv_log(mid), _inv_log(hi)
    whole = (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi)
    tol_i = tol[idx]
    depth = np.zeros(idx.shape, dtype=np.int32)

    for _ in range(64):
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        f_lm = _inv_log(lm)
        f_rm = _inv_log(rm)
        left = (mid - lo) / 6.0 * (f_lo + 4.0 * f_lm + f_mid)
        right = (hi - mid) / 6.0 * (f_mid + 4.0 * f_rm + f_hi)
        s2 = left + right
        err = (s2 - whole) / 15.0
        floor = 32.0 * np.finfo(float).eps * (np.abs(s2) + 1e-300)
        done = (np.abs(err) <= np.maximum(tol_i, floor)) | (depth >= 48)
        if np.any(done):
            np.add.at(out, idx[done], s2[done] + err[done])
        keep = ~done
        if not np.any(keep):
            break
        # split every unconverged interval into its two halves
        idx = np.concatenate([idx[keep], idx[keep]])
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        f_lo = np.concatenate([f_lo[keep], f_mid[keep]])
        f_hi = np.concatenate([f_mid[keep], f_hi[keep]])
        whole = np.concatenate([left[keep], right[keep]])
        tol_i = np.concatenate([tol_i[keep] / 2.0, tol_i[keep] / 2.0])
        depth = np.concatenate([depth[keep] + 1, depth[keep] + 1])
        mid = 0.5 * (lo + hi)
        f_mid = _inv_log(mid)
    return out
