"""Solvers for the local problem over Z_q^*.

Three entry points:

* :func:`solve_theorem2_bruteforce` - lexicographically first tuple found by
  exhausting (x1, x2, x3) with x4 forced.
* :func:`solve_theorem2_structured` - the inductive construction: prime case,
  lifting from p to p^k through progression averages, and CRT gluing of
  coprime factors through fiber averages.
* :func:`solve_corollary1` - the [0, 1]-valued variant for odd squarefree q
  (3 | q handled by an explicit mod-3 case analysis), plus moduli 2*m.

All inequality decisions are exact: the inputs are floats or Fractions, and
the means K1, K2 are computed as Fractions.  Float arithmetic is only used as a
fast filter, with exact re-evaluation of anything near a tie.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

import numpy as np

from .errors import HypothesisViolated, InternalContradiction, PreconditionViolated
from .residue import (
    ResidueFunction,
    crt_combine,
    factorize,
    fiber_average,
    fiber_restrict,
    is_unit,
    progression_average,
    unit_index,
    unit_mean,
    units,
)

__all__ = [
    "LocalInstance",
    "LocalSolution",
    "ResidueFunction",
    "unit_mean",
    "solve_theorem2_bruteforce",
    "solve_theorem2_structured",
    "solve_corollary1",
    "check_theorem2",
    "check_corollary1",
    "check_sumset_cover",
    "SumsetCoverReport",
    "t_sequence",
    "t_sequence_mod",
]

Quad = tuple[int, int, int, int]


@dataclass(frozen=True)
class LocalInstance:
    q: int
    f: tuple[ResidueFunction, ResidueFunction, ResidueFunction, ResidueFunction]
    n: int

    def __post_init__(self) -> None:
        if len(self.f) != 4:
            raise ValueError("a local instance needs exactly four functions")
        for fi in self.f:
            if fi.q != self.q:
                raise ValueError(f"function defined mod {fi.q}, instance mod {self.q}")

    @property
    def K1(self) -> Fraction:
        return self.f[0].exact_mean + self.f[1].exact_mean

    @property
    def K2(self) -> Fraction:
        return self.f[2].exact_mean + self.f[3].exact_mean


@dataclass(frozen=True)
class LocalSolution:
    x: Quad
    v: tuple[float, float, float, float]
    K1: float
    K2: float


def _solution(q: int, fs: Sequence[ResidueFunction], x: Quad) -> LocalSolution:
    K1 = fs[0].exact_mean + fs[1].exact_mean
    K2 = fs[2].exact_mean + fs[3].exact_mean
    return LocalSolution(
        x=tuple(int(xi) % q for xi in x),
        v=tuple(float(f(xi)) for f, xi in zip(fs, x)),
        K1=float(K1),
        K2=float(K2),
    )


# -- exact pair tables ------------------------------------------------------


def _pair_ok(fa: ResidueFunction, fb: ResidueFunction, K: Fraction) -> np.ndarray:
    """ok[i, j] <=> fa(u_i) + fb(u_j) >= K, decided exactly."""
    s = fa.array[:, None] + fb.array[None, :]
    Kf = float(K)
    ok = s >= Kf
    tol = 1e-12 * (1.0 + abs(Kf) + float(np.abs(s).max(initial=0.0)))
    ea, eb = fa.exact_values, fb.exact_values
    for i, j in zip(*np.nonzero(np.abs(s - Kf) <= tol)):
        ok[i, j] = ea[i] + eb[j] >= K
    return ok


@dataclass(frozen=True)
class _PairTable:
    ok: np.ndarray
    sums: np.ndarray  # (u_i + u_j) mod q
    reach: np.ndarray  # reach[s] <=> some ok pair sums to s


@lru_cache(maxsize=256)
def _pair_table(fa: ResidueFunction, fb: ResidueFunction) -> _PairTable:
    q = fa.q
    u = np.array(units(q), dtype=np.int64)
    ok = _pair_ok(fa, fb, fa.exact_mean + fb.exact_mean)
    sums = (u[:, None] + u[None, :]) % q
    reach = np.zeros(q, dtype=bool)
    reach[sums[ok]] = True
    return _PairTable(ok, sums, reach)


def _bruteforce(q: int, fs: Sequence[ResidueFunction], n: int) -> Quad:
    """Lexicographically smallest (x1, x2, x3, x4) meeting both mean inequalities.

    Equivalent to scanning every (x1, x2, x3) in order with x4 = n - x1 - x2 - x3,
    but with the pair conditions tabulated once per set of functions.
    """
    n %= q
    t12 = _pair_table(fs[0], fs[1])
    t34 = _pair_table(fs[2], fs[3])
    u = np.array(units(q), dtype=np.int64)
    cand = t12.ok & t34.reach[(n - t12.sums) % q]
    flat = np.flatnonzero(cand)
    if flat.size == 0:
        raise InternalContradiction(f"no local solution mod {q} for n = {n}")
    i1, i2 = divmod(int(flat[0]), len(u))
    rest = (n - u[i1] - u[i2]) % q
    idx4 = unit_index(q)[(rest - u) % q]
    valid = idx4 >= 0
    hit = np.zeros(len(u), dtype=bool)
    hit[valid] = t34.ok[np.flatnonzero(valid), idx4[valid]]
    i3 = int(np.flatnonzero(hit)[0])
    return int(u[i1]), int(u[i2]), int(u[i3]), int((rest - u[i3]) % q)


def _check_theorem2_pre(q: int) -> None:
    if q < 1 or math.gcd(q, 6) != 1:
        raise PreconditionViolated(f"need (q, 6) = 1, got q = {q}")


def solve_theorem2_bruteforce(inst: LocalInstance) -> LocalSolution:
    _check_theorem2_pre(inst.q)
    x = _bruteforce(inst.q, inst.f, inst.n)
    return _solution(inst.q, inst.f, x)


def _best_shift(ha: Sequence[Fraction], hb: Sequence[Fraction], z: int, m: int) -> int:
    """argmax over y in Z_m of ha(y) + hb(z - y); first maximiser wins."""
    best, arg = None, 0
    for y in range(m):
        val = ha[y] + hb[(z - y) % m]
        if best is None or val > best:
            best, arg = val, y
    return arg


def _structured(q: int, fs: Sequence[ResidueFunction], n: int) -> Quad:
    n %= q
    if q == 1:
        return 0, 0, 0, 0
    fm = factorize(q)
    if len(fm.factors) > 1:
        p, e = fm.factors[0]
        q1, q2 = p**e, q // p**e
        gs = [_fiber_average(f, q1, q2) for f in fs]
        xs = _structured(q1, gs, n % q1)
        hs = [_fiber_restrict(f, x, q1, q2) for f, x in zip(fs, xs)]
        ys = _structured(q2, hs, n % q2)
        return tuple(crt_combine(x, y, q1, q2) for x, y in zip(xs, ys))
    p, k = fm.factors[0]
    if k == 1:
        return _bruteforce(p, fs, n)
    gs = [_progression_average(f, p) for f in fs]
    xs = _bruteforce(p, gs, n % p)
    m = q // p
    n_lift = ((n - sum(xs)) // p) % m
    # h_i(y) = f_i(x_i + y p) lives on all of Z_m; averaging over y shows
    # max_y h1(y) + h2(z - y) >= g1(x1) + g2(x2) >= K1 for any split z.
    h = [[f.exact(x + y * p) for y in range(m)] for f, x in zip(fs, xs)]
    z1, z2 = 0, n_lift
    y1 = _best_shift(h[0], h[1], z1, m)
    y3 = _best_shift(h[2], h[3], z2, m)
    ys = (y1, (z1 - y1) % m, y3, (z2 - y3) % m)
    return tuple((x + y * p) % q for x, y in zip(xs, ys))


@lru_cache(maxsize=512)
def _fiber_average(f: ResidueFunction, q1: int, q2: int) -> ResidueFunction:
    return fiber_average(f, q1, q2)


@lru_cache(maxsize=4096)
def _fiber_restrict(f: ResidueFunction, x: int, q1: int, q2: int) -> ResidueFunction:
    return fiber_restrict(f, x, q1, q2)


@lru_cache(maxsize=512)
def _progression_average(f: ResidueFunction, p: int) -> ResidueFunction:
    return progression_average(f, p)


def solve_theorem2_structured(inst: LocalInstance) -> LocalSolution:
    _check_theorem2_pre(inst.q)
    x = _structured(inst.q, inst.f, inst.n)
    sol = _solution(inst.q, inst.f, x)
    if not check_theorem2(inst, sol):
        raise InternalContradiction(f"structured solver produced an invalid tuple {x} mod {inst.q}")
    return sol


def check_theorem2(inst: LocalInstance, sol: LocalSolution) -> bool:
    """Re-check a solution against the instance with exact arithmetic."""
    q = inst.q
    if any(not is_unit(x, q) for x in sol.x):
        return False
    if (sum(sol.x) - inst.n) % q:
        return False
    e = [f.exact(x) for f, x in zip(inst.f, sol.x)]
    return e[0] + e[1] >= inst.K1 and e[2] + e[3] >= inst.K2


# -- corollary: [0, 1]-valued functions, odd squarefree q ------------------


def _mod3(fs: Sequence[ResidueFunction], n: int) -> Quad:
    """Explicit case analysis on Z_3 = {0, 1, 2}, units {1, 2}."""
    n %= 3
    v = [{1: f.exact(1), 2: f.exact(2)} for f in fs]

    def total(x: Quad) -> Fraction:
        return sum((v[i][x[i]] for i in range(4)), Fraction(0))

    zero = next(((i, j) for i in range(4) for j in (1, 2) if v[i][j] == 0), None)
    if zero is None:
        # every admissible tuple is a candidate; their average already exceeds 2
        cands = [x for x in product((1, 2), repeat=4) if sum(x) % 3 == n]
    else:
        i, j = zero
        k = i ^ 1  # partner in the same pair
        c, d = (2, 3) if i < 2 else (0, 1)
        xi = 3 - j
        if (n - xi) % 3:
            # x_k makes the other pair sum to 0: options (1, 2), (2, 1)
            xk = (n - xi) % 3
            others = [(xk, 1, 2), (xk, 2, 1)]
        else:
            # other pair is (1, 1) with x_k = 1, or (2, 2) with x_k = 2
            others = [(1, 1, 1), (2, 2, 2)]
        cands = []
        for xk, xc, xd in others:
            x = [0, 0, 0, 0]
            x[i], x[k], x[c], x[d] = xi, xk, xc, xd
            cands.append(tuple(x))
    best = None
    for x in cands:
        if any(v[i][x[i]] == 0 for i in range(4)):
            continue
        if best is None or total(x) > total(best):
            best = x
    if best is None or total(best) <= 2:
        raise InternalContradiction(f"mod-3 case analysis failed for n = {n}")
    return best


def _cor1_odd(q: int, fs: Sequence[ResidueFunction], n: int) -> Quad:
    n %= q
    if q == 1:
        return 0, 0, 0, 0
    if q % 3:
        return _structured(q, fs, n)
    if q == 3:
        return _mod3(fs, n)
    q1 = q // 3
    gs = [_fiber_average(f, q1, 3) for f in fs]
    xs = _structured(q1, gs, n % q1)
    hs = [_fiber_restrict(f, x, q1, 3) for f, x in zip(fs, xs)]
    ys = _mod3(hs, n % 3)
    return tuple(crt_combine(x, y, q1, 3) for x, y in zip(xs, ys))


def _check_corollary1_pre(q: int, fs: Sequence[ResidueFunction], n: int) -> None:
    fm = factorize(q)
    odd_part = q // 2 if q % 2 == 0 else q
    if not fm.squarefree or odd_part % 2 == 0:
        raise HypothesisViolated(f"q = {q} is not odd squarefree or twice odd squarefree")
    if q % 2 == 0 and n % 2:
        raise HypothesisViolated(f"even modulus {q} needs even n, got {n}")
    for i, f in enumerate(fs, 1):
        if f.q != q:
            raise ValueError(f"f{i} defined mod {f.q}, expected {q}")
        if any(not (0 <= x <= 1) for x in f.exact_values):
            raise HypothesisViolated(f"f{i} takes values outside [0, 1]")
    if fs[0].exact_mean + fs[1].exact_mean <= 1:
        raise HypothesisViolated("mean of f1 + f2 must exceed 1")
    if fs[2].exact_mean + fs[3].exact_mean <= 1:
        raise HypothesisViolated("mean of f3 + f4 must exceed 1")


def solve_corollary1(q: int, fs: Sequence[ResidueFunction], n: int) -> LocalSolution:
    """x_i in Z_q^* with sum = n, sum of f_i(x_i) > 2 and every f_i(x_i) != 0.

    For q = 2m the Z_2^* coordinate of every x_i is forced to 1, so the problem
    reduces to Z_m (n must be even).
    """
    fs = tuple(fs)
    _check_corollary1_pre(q, fs, n)
    if q % 2 == 0:
        m = q // 2
        gs = [ResidueFunction(m, tuple(f.exact(crt_combine(1, y, 2, m)) for y in units(m))) for f in fs]
        ys = _cor1_odd(m, gs, n % m)
        x = tuple(crt_combine(1, y, 2, m) for y in ys)
    else:
        x = _cor1_odd(q, fs, n)
    sol = _solution(q, fs, x)
    if not check_corollary1(q, fs, n, sol):
        raise InternalContradiction(f"corollary solver produced an invalid tuple {x} mod {q}")
    return sol


def check_corollary1(q: int, fs: Sequence[ResidueFunction], n: int, sol: LocalSolution) -> bool:
    if any(not is_unit(x, q) for x in sol.x) or (sum(sol.x) - n) % q:
        return False
    e = [f.exact(x) for f, x in zip(fs, sol.x)]
    return sum(e, Fraction(0)) > 2 and all(v != 0 for v in e)


# -- sumset covering ----------------------------------------------------------


@dataclass(frozen=True)
class SumsetCoverReport:
    q: int
    sizes: tuple[int, int, int, int]
    phi: int
    hypotheses: bool
    cover: bool
    sumset: tuple[int, ...]
    witnesses: dict[int, Quad]


def check_sumset_cover(q: int, sets: Sequence[Sequence[int]]) -> SumsetCoverReport:
    """Full quadruple sumset of A1..A4 inside Z_q, with a lexicographically first witness per residue."""
    if len(sets) != 4:
        raise ValueError("need four sets")
    A = [np.array(sorted({a % q for a in s}), dtype=np.int64) for s in sets]
    for i, a in enumerate(A, 1):
        if any(not is_unit(int(x), q) for x in a):
            raise ValueError(f"A{i} is not contained in Z_{q}^*")
    phi = len(units(q))
    sizes = tuple(len(a) for a in A)
    hyp = sizes[0] + sizes[1] > phi and sizes[2] + sizes[3] > phi
    witnesses: dict[int, Quad] = {}
    if all(len(a) for a in A):
        s12 = ((A[0][:, None] + A[1][None, :]) % q).ravel()
        s34 = (A[2][:, None] + A[3][None, :]) % q
        reach34 = np.zeros(q, dtype=bool)
        reach34[s34.ravel()] = True
        for n in range(q):
            hit = np.flatnonzero(reach34[(n - s12) % q])
            if hit.size == 0:
                continue
            i1, i2 = divmod(int(hit[0]), len(A[1]))
            rest = (n - A[0][i1] - A[1][i2]) % q
            i3, i4 = divmod(int(np.flatnonzero((s34 == rest).ravel())[0]), len(A[3]))
            witnesses[n] = (int(A[0][i1]), int(A[1][i2]), int(A[2][i3]), int(A[3][i4]))
    sumset = tuple(sorted(witnesses))
    return SumsetCoverReport(q, sizes, phi, hyp, len(sumset) == q, sumset, witnesses)


# -- the affine walk t_k(1) ----------------------------------------------------



def t_sequence(k: int) -> int:
    """t_k(1) from t_0 = 1, t_k = 1 - 2 t_{k-1}; equals (1 - (-2)^(k+1)) / 3."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > 62:
        raise OverflowError(f"t_{k}(1) does not fit in a signed 64-bit integer")
    t = 1
    for _ in range(k):
        t = 1 - 2 * t
    return t


def t_sequence_mod(k: int, p: int) -> int:
    """t_k(1) mod p, for walks longer than the 64-bit range."""
    t = 1 % p
    for _ in range(k):
        t = (1 - 2 * t) % p
    return t


def multiplicative_order(a: int, p: int) -> int:
    if math.gcd(a, p) != 1:
        raise ValueError(f"{a} is not invertible mod {p}")
    r, x = 1, a % p
    while x != 1 % p:
        x = x * a % p
        r += 1
    return r
