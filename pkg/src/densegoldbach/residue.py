"""Exact arithmetic over Z_q: factorization, unit groups, CRT, and tables on Z_q^*."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Iterable

import numpy as np

from .errors import NonCoprimeModuli

Number = float | Fraction


@dataclass(frozen=True)
class FactoredModulus:
    q: int
    factors: tuple[tuple[int, int], ...]
    phi: int

    @property
    def squarefree(self) -> bool:
        return all(e == 1 for _, e in self.factors)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)


@lru_cache(maxsize=4096)
def factorize(q: int) -> FactoredModulus:
    if q < 1:
        raise ValueError(f"modulus must be positive, got {q}")
    factors = []
    m = q
    d = 2
    while d * d <= m:
        if m % d == 0:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            factors.append((d, e))
        d += 1 if d == 2 else 2
    if m > 1:
        factors.append((m, 1))
    phi = 1
    for p, e in factors:
        phi *= p ** (e - 1) * (p - 1)
    return FactoredModulus(q, tuple(factors), phi)


def euler_phi(q: int) -> int:
    return factorize(q).phi


@lru_cache(maxsize=1024)
def units(q: int) -> tuple[int, ...]:
    """Residues coprime to q, ascending.  Z_1^* is the single residue 0."""
    if q < 1:
        raise ValueError(f"modulus must be positive, got {q}")
    if q == 1:
        return (0,)
    return tuple(x for x in range(1, q) if math.gcd(x, q) == 1)


@lru_cache(maxsize=1024)
def unit_index(q: int) -> np.ndarray:
    """Array of length q mapping a residue to its position in ``units(q)``, or -1."""
    idx = np.full(q, -1, dtype=np.int64)
    u = units(q)
    idx[list(u)] = np.arange(len(u))
    idx.flags.writeable = False
    return idx


def is_unit(x: int, q: int) -> bool:
    return q == 1 or math.gcd(x % q, q) == 1


def _check_coprime(q1: int, q2: int) -> None:
    if math.gcd(q1, q2) != 1:
        raise NonCoprimeModuli(f"gcd({q1}, {q2}) = {math.gcd(q1, q2)} != 1")


def crt_split(x: int, q1: int, q2: int) -> tuple[int, int]:
    _check_coprime(q1, q2)
    return x % q1, x % q2


def crt_combine(r1: int, r2: int, q1: int, q2: int) -> int:
    _check_coprime(q1, q2)
    if q1 == 1:
        return r2 % q2
    if q2 == 1:
        return r1 % q1
    t = ((r2 - r1) * pow(q1, -1, q2)) % q2
    return (r1 + q1 * t) % (q1 * q2)


@dataclass(frozen=True)
class ResidueFunction:
    """A real table on Z_q^*; ``values[i]`` belongs to ``units(q)[i]``.

    Values are floats or Fractions.  Comparisons that decide theorem
    inequalities go through ``exact_values`` so no tolerance is involved.
    """

    q: int
    values: tuple[Number, ...]

    def __post_init__(self) -> None:
        if len(self.values) != euler_phi(self.q):
            raise ValueError(
                f"table on Z_{self.q}^* needs {euler_phi(self.q)} values, got {len(self.values)}"
            )

    @classmethod
    def from_callable(cls, q: int, fn: Callable[[int], Number]) -> "ResidueFunction":
        return cls(q, tuple(fn(x) for x in units(q)))

    @classmethod
    def from_mapping(cls, q: int, table: dict[int, Number]) -> "ResidueFunction":
        return cls(q, tuple(table[x] for x in units(q)))

    @classmethod
    def constant(cls, q: int, c: Number) -> "ResidueFunction":
        return cls(q, (c,) * euler_phi(q))

    @classmethod
    def indicator(cls, q: int, members: Iterable[int]) -> "ResidueFunction":
        s = {m % q for m in members}
        return cls(q, tuple(1.0 if x in s else 0.0 for x in units(q)))

    def __call__(self, x: int) -> Number:
        i = unit_index(self.q)[x % self.q]
        if i < 0:
            raise KeyError(f"{x} is not a unit mod {self.q}")
        return self.values[i]

    def exact(self, x: int) -> Fraction:
        return self.exact_values[unit_index(self.q)[x % self.q]]

    @cached_property
    def array(self) -> np.ndarray:
        return np.array([float(v) for v in self.values], dtype=np.float64)

    @cached_property
    def exact_values(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(v) for v in self.values)

    @cached_property
    def exact_mean(self) -> Fraction:
        return sum(self.exact_values, Fraction(0)) / len(self.values)

    def items(self):
        return zip(units(self.q), self.values)

    def shifted(self, c: Number) -> "ResidueFunction":
        return ResidueFunction(self.q, tuple(v + c for v in self.values))


def unit_mean(f: ResidueFunction) -> float:
    """Average of f over Z_q^* (correctly rounded)."""
    return math.fsum(f.values) / len(f.values)


def fiber_average(f: ResidueFunction, q1: int, q2: int) -> ResidueFunction:
    """g(x) = mean over y in Z_{q2}^* of f((x, y)), as an exact table on Z_{q1}^*."""
    if f.q != q1 * q2:
        raise ValueError("fiber split must multiply to f.q")
    _check_coprime(q1, q2)
    u2 = units(q2)
    vals = []
    for x in units(q1):
        total = sum((f.exact(crt_combine(x, y, q1, q2)) for y in u2), Fraction(0))
        vals.append(total / len(u2))
    return ResidueFunction(q1, tuple(vals))


def fiber_restrict(f: ResidueFunction, x: int, q1: int, q2: int) -> ResidueFunction:
    """h(y) = f((x, y)) on Z_{q2}^*, the fiber of f above x in Z_{q1}^*."""
    return ResidueFunction(q2, tuple(f.exact(crt_combine(x, y, q1, q2)) for y in units(q2)))


def progression_average(f: ResidueFunction, p: int) -> ResidueFunction:
    """g(x) = p^{1-k} * sum of f(a) over a = x (mod p), for f on Z_{p^k}^*."""
    q = f.q
    m = q // p
    vals = []
    for x in units(p):
        total = sum((f.exact(x + y * p) for y in range(m)), Fraction(0))
        vals.append(total / m)
    return ResidueFunction(p, tuple(vals))

