"""Sieve-backed prime subsets, density estimates, and W-trick statistics."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DescriptorError, LimitTooSmall
from .residue import ResidueFunction, euler_phi, units


def _eratosthenes(limit: int) -> np.ndarray:
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    mask[4::2] = False
    for p in range(3, math.isqrt(limit) + 1, 2):
        if mask[p]:
            mask[p * p :: 2 * p] = False
    mask.flags.writeable = False
    return mask


_MASK_CACHE = [_eratosthenes(1 << 10)]


def prime_mask(limit: int) -> np.ndarray:
    """Read-only boolean array of length limit + 1, true exactly at primes."""
    if limit < 0:
        return np.zeros(0, dtype=bool)
    cached = _MASK_CACHE[0]
    if len(cached) <= limit:
        # grow geometrically so sweeps do not re-sieve every step
        cached = _eratosthenes(max(limit, 2 * (len(cached) - 1)))
        _MASK_CACHE[0] = cached
    return cached[: limit + 1]


def sieve(limit: int) -> np.ndarray:
    """Primes <= limit, ascending."""
    return np.flatnonzero(prime_mask(limit))


def is_prime(x: int) -> bool:
    if x < 2:
        return False
    if x < 4:
        return True
    if x % 2 == 0:
        return False
    for d in range(3, math.isqrt(x) + 1, 2):
        if x % d == 0:
            return False
    return True


def next_prime(x: int) -> int:
    """Smallest prime strictly greater than x."""
    c = max(x + 1, 2)
    while not is_prime(c):
        c += 1
    return c


@dataclass(frozen=True, eq=False)
class PrimeSubset:
    limit: int
    membership: np.ndarray = field(repr=False)
    descriptor: str = ""

    def __post_init__(self) -> None:
        if len(self.membership) != self.limit + 1:
            raise ValueError("membership must cover 0..limit")
        if np.any(self.membership & ~prime_mask(self.limit)):
            raise ValueError("membership contains a non-prime")
        self.membership.flags.writeable = False

    def __contains__(self, x: int) -> bool:
        if not 0 <= x <= self.limit:
            raise LimitTooSmall(f"{x} outside the sieved range [0, {self.limit}]")
        return bool(self.membership[x])

    def elements(self, upto: int | None = None) -> np.ndarray:
        m = self.membership if upto is None else self.membership[: upto + 1]
        return np.flatnonzero(m)

    def count(self, upto: int | None = None) -> int:
        m = self.membership if upto is None else self.membership[: upto + 1]
        return int(np.count_nonzero(m))

    def same_members(self, other: "PrimeSubset", upto: int) -> bool:
        return bool(np.array_equal(self.membership[: upto + 1], other.membership[: upto + 1]))


def all_primes(limit: int) -> PrimeSubset:
    return PrimeSubset(limit, prime_mask(limit).copy(), "all")


def empty_subset(limit: int) -> PrimeSubset:
    return PrimeSubset(limit, np.zeros(limit + 1, dtype=bool), "none")


def residue_class_subset(limit: int, m: int, allowed: Iterable[int]) -> PrimeSubset:
    allowed = sorted({a % m for a in allowed})
    x = np.arange(limit + 1)
    member = prime_mask(limit) & np.isin(x % m, allowed)
    return PrimeSubset(limit, member, f"mod {m}: {','.join(map(str, allowed))}")


def minus(P: PrimeSubset, removed: Iterable[int]) -> PrimeSubset:
    removed = sorted(set(removed))
    member = P.membership.copy()
    for r in removed:
        if 0 <= r <= P.limit:
            member[r] = False
    return PrimeSubset(P.limit, member, f"{P.descriptor} minus({','.join(map(str, removed))})")


def union(parts: Iterable[PrimeSubset]) -> PrimeSubset:
    parts = list(parts)
    member = np.zeros(parts[0].limit + 1, dtype=bool)
    for P in parts:
        member |= P.membership
    return PrimeSubset(parts[0].limit, member, f"union({'; '.join(P.descriptor for P in parts)})")


# -- descriptor grammar -----------------------------------------------------
#
#   expr  := atom ( "minus(" int ("," int)* ")" )*
#   atom  := "all" | "none" | "mod" int ":" int ("," int)* | "union(" expr (";" expr)* ")"
#          | "minus(" int ("," int)* ")"          (shorthand for: all minus(...))

_TOKEN = re.compile(r"\s*(?:(\d+)|(all|none|mod|union|minus)|([(),;:]))")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise DescriptorError(f"cannot parse {text[pos:]!r} in descriptor {text!r}")
        out.append(m.group(m.lastindex))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str, limit: int) -> None:
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.limit = limit

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expected: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise DescriptorError(f"expected {expected or 'token'} in {self.text!r}, got {tok!r}")
        self.i += 1
        return tok

    def int_list(self) -> list[int]:
        vals = [self.integer()]
        while self.peek() == ",":
            self.take(",")
            vals.append(self.integer())
        return vals

    def integer(self) -> int:
        tok = self.take()
        if not tok.isdigit():
            raise DescriptorError(f"expected an integer in {self.text!r}, got {tok!r}")
        return int(tok)

    def expr(self) -> PrimeSubset:
        P = self.atom()
        while self.peek() == "minus":
            self.take("minus")
            self.take("(")
            P = minus(P, self.int_list())
            self.take(")")
        return P

    def atom(self) -> PrimeSubset:
        tok = self.take()
        if tok == "all":
            return all_primes(self.limit)
        if tok == "none":
            return empty_subset(self.limit)
        if tok == "mod":
            m = self.integer()
            if m < 1:
                raise DescriptorError("modulus must be positive")
            self.take(":")
            return residue_class_subset(self.limit, m, self.int_list())
        if tok == "union":
            self.take("(")
            parts = [self.expr()]
            while self.peek() == ";":
                self.take(";")
                parts.append(self.expr())
            self.take(")")
            return union(parts)
        if tok == "minus":
            self.take("(")
            P = minus(all_primes(self.limit), self.int_list())
            self.take(")")
            return P
        raise DescriptorError(f"unexpected {tok!r} in {self.text!r}")


def parse_subset(text: str, limit: int) -> PrimeSubset:
    """Build a PrimeSubset from a descriptor such as ``mod 3: 1`` or ``all minus(3)``."""
    parser = _Parser(text, limit)
    P = parser.expr()
    if parser.peek() is not None:
        raise DescriptorError(f"trailing input {parser.toks[parser.i:]} in {text!r}")
    return PrimeSubset(P.limit, P.membership.copy(), text.strip())


# -- statistics ---------------------------------------------------------------


@dataclass(frozen=True)
class DensityEstimate:
    N: int
    count_P: int
    count_primes: int
    ratio: float


def density_estimate(P: PrimeSubset, N: int) -> DensityEstimate:
    if N > P.limit:
        raise LimitTooSmall(f"N = {N} exceeds the sieved limit {P.limit}")
    cp = P.count(N)
    ca = int(np.count_nonzero(prime_mask(N)))
    return DensityEstimate(N, cp, ca, cp / ca if ca else 0.0)


@dataclass(frozen=True)
class WTrickStatistics:
    f: ResidueFunction
    raw: dict[int, float]
    clamped: tuple[int, ...]

    @property
    def clamp_applied(self) -> bool:
        return bool(self.clamped)


def weighted_log_sum(P: PrimeSubset, upto: int, W: int, b: int | None = None) -> float:
    """Sum of log x over x in P, x <= upto, restricted to x = b (mod W) or to (x, W) = 1."""
    xs = P.elements(upto)
    if b is None:
        xs = xs[np.gcd(xs, W) == 1] if W > 1 else xs
    else:
        xs = xs[xs % W == b % W]
    return math.fsum(np.log(xs.astype(np.float64)))


def wtrick_statistics(P: PrimeSubset, n: int, W: int, kappa: float) -> WTrickStatistics:
    """f(b) = max(0, (2 phi(W) / n) * sum_{x <= n/2, x = b mod W} 1_P(x) log x - 3 kappa).

    Values above 1 are clamped to 1 and listed in ``clamped``.
    """
    if W < 1:
        raise ValueError("W must be positive")
    half = n // 2
    if P.limit < half:
        raise LimitTooSmall(f"subset sieved to {P.limit}, need {half}")
    phi = euler_phi(W)
    xs = P.elements(half)
    logs = np.log(xs.astype(np.float64))
    residues = xs % W
    raw: dict[int, float] = {}
    vals = []
    clamped = []
    for b in units(W):
        s = math.fsum(logs[residues == b])
        r = 2.0 * phi / n * s - 3.0 * kappa
        raw[b] = r
        v = max(0.0, r)
        if v > 1.0:
            clamped.append(b)
            v = 1.0
        vals.append(v)
    return WTrickStatistics(ResidueFunction(W, tuple(vals)), raw, tuple(clamped))


def lambda_weights(b: int, W: int, N: int, mask: np.ndarray | None = None) -> np.ndarray:
    """lambda(x) = phi(W) log(Wx + b) / (W N) where Wx + b is prime, over x in Z_N."""
    if not ((W == 1 and b == 0) or 1 <= b < W):
        raise ValueError(f"residue b = {b} out of range for W = {W}")
    top = W * (N - 1) + b
    if mask is None or len(mask) <= top:
        mask = prime_mask(top)
    x = np.arange(N, dtype=np.int64)
    vals = W * x + b
    hit = mask[vals]
    out = np.zeros(N, dtype=np.float64)
    out[hit] = euler_phi(W) * np.log(vals[hit].astype(np.float64)) / (W * N)
    return out
