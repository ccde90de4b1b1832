"""Representation search by indicator convolution, shared by the pipeline and the direct oracle."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import LimitTooSmall
from .primes import PrimeSubset, is_prime, next_prime

Quad = tuple[int, int, int, int]


def _cyclic_counts(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Integer cyclic convolution of nonnegative integer vectors via FFT, rounded."""
    c = np.fft.irfft(np.fft.rfft(f) * np.fft.rfft(g), n=f.size)
    return np.rint(c).astype(np.int64)


class QuadrupleDecoder:
    """Find x_1 + x_2 + x_3 + x_4 = t with x_i in X_i (nonnegative integers), for any t <= limit.

    The X_i are given as boolean indicators.  Pair and triple sumset counts are
    formed once over Z_M with M the next prime above 2 * limit; every partial
    sum stays below M, so the cyclic counts equal the integer counts.
    """

    def __init__(self, indicators: Sequence[np.ndarray], limit: int) -> None:
        if len(indicators) != 4:
            raise ValueError("need four indicator vectors")
        self.limit = limit
        self.M = next_prime(2 * limit)
        vecs = []
        for ind in indicators:
            v = np.zeros(self.M, dtype=np.float64)
            ind = np.asarray(ind, dtype=bool)[: limit + 1]
            v[: ind.size] = ind
            vecs.append(v)
        self.ind = [v[: limit + 1] > 0 for v in vecs]
        c34 = _cyclic_counts(vecs[2], vecs[3])
        c34[limit + 1 :] = 0
        c234 = _cyclic_counts(vecs[1], c34.astype(np.float64))
        self.c34 = c34[: limit + 1]
        self.c234 = c234[: limit + 1]

    def count(self, t: int) -> int:
        """Number of ordered quadruples summing to t."""
        self._check(t)
        x1 = np.flatnonzero(self.ind[0][: t + 1])
        return int(self.c234[t - x1].sum())

    def find(self, t: int) -> Quad | None:
        """Lexicographically smallest quadruple, or None."""
        self._check(t)
        x1s = np.flatnonzero(self.ind[0][: t + 1])
        ok = x1s[self.c234[t - x1s] > 0]
        if ok.size == 0:
            return None
        x1 = int(ok[0])
        r = t - x1
        x2s = np.flatnonzero(self.ind[1][: r + 1])
        x2 = int(x2s[self.c34[r - x2s] > 0][0])
        r -= x2
        x3s = np.flatnonzero(self.ind[2][: r + 1])
        x3 = int(x3s[self.ind[3][r - x3s]][0])
        return x1, x2, x3, r - x3

    def _check(self, t: int) -> None:
        if not 0 <= t <= self.limit:
            raise LimitTooSmall(f"target {t} outside [0, {self.limit}]")


class RepresentationFinder:
    """n = p1 + p2 + p3 + p4 with p_i in P_i, for every n up to ``limit``."""

    def __init__(self, subsets: Sequence[PrimeSubset], limit: int) -> None:
        for i, P in enumerate(subsets, 1):
            if P.limit < limit:
                raise LimitTooSmall(f"P{i} sieved to {P.limit}, need {limit}")
        self.subsets = tuple(subsets)
        self.decoder = QuadrupleDecoder([P.membership[: limit + 1] for P in subsets], limit)

    def find(self, n: int) -> Quad | None:
        return self.decoder.find(n)

    def count(self, n: int) -> int:
        return self.decoder.count(n)


def find_representation_direct(n: int, subsets: Sequence[PrimeSubset]) -> Quad | None:
    """Lexicographically smallest (p1, p2, p3, p4) in P1 x P2 x P3 x P4 with sum n."""
    if n < 0:
        return None
    return RepresentationFinder(subsets, n).find(n)


def verify_representation(n: int, subsets: Sequence[PrimeSubset], rep: Sequence[int]) -> bool:
    return (
        len(rep) == 4
        and sum(rep) == n
        and all(is_prime(p) and 0 <= p <= P.limit and p in P for p, P in zip(rep, subsets))
    )
