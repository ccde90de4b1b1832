"""Fourier analysis on Z_N with the convention f~(r) = sum_x f(x) e(-xr/N).

Transforms go through ``numpy.fft`` (pocketfft), which handles prime lengths
with a Bluestein reduction and so stays O(N log N).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import BoundViolation, HypothesisViolated, LengthMismatch, SpectralPrecisionError
from .primes import is_prime


@dataclass(frozen=True, eq=False)
class SpectralVector:
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("a spectral vector is a nonempty 1-d sequence")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.values.size

    @cached_property
    def spectrum(self) -> np.ndarray:
        s = np.fft.fft(self.values)
        s.flags.writeable = False
        return s

    def total(self) -> float:
        return math.fsum(self.values)

    def to_columnar(self) -> str:
        buf = io.StringIO()
        buf.write("index,value\n")
        for i, v in enumerate(self.values):
            buf.write(f"{i},{float(v)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_columnar(cls, text: str, N: int | None = None) -> "SpectralVector":
        rows = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if rows and rows[0].lower().startswith("index"):
            rows = rows[1:]
        pairs = []
        for ln in rows:
            i, v = ln.split(",")
            pairs.append((int(i), float(v)))
        size = N if N is not None else (max(i for i, _ in pairs) + 1 if pairs else 0)
        vals = np.zeros(size)
        for i, v in pairs:
            if not 0 <= i < size:
                raise ValueError(f"index {i} outside Z_{size}")
            vals[i] = v
        return cls(vals)


def _vec(v) -> SpectralVector:
    return v if isinstance(v, SpectralVector) else SpectralVector(v)


def _same_length(*vs: SpectralVector) -> int:
    N = vs[0].N
    if any(v.N != N for v in vs):
        raise LengthMismatch(f"lengths differ: {[v.N for v in vs]}")
    return N


def dft(v) -> np.ndarray:
    return _vec(v).spectrum


def idft(spectrum: np.ndarray) -> np.ndarray:
    """Inverse of :func:`dft`; returns the complex sequence (real inputs round-trip to ~0 imaginary)."""
    return np.fft.ifft(spectrum)


def dft_direct(values: Sequence[float]) -> np.ndarray:
    """O(N^2) evaluation of the same transform; an oracle for small N."""
    v = np.asarray(values, dtype=np.float64)
    N = v.size
    x = np.arange(N)
    phase = np.exp(-2j * np.pi * ((np.outer(x, x) % N) / N))
    return phase @ v


def convolve(f, g) -> SpectralVector:
    """Cyclic convolution f * g (x) = sum_y f(y) g(x - y)."""
    f, g = _vec(f), _vec(g)
    _same_length(f, g)
    return SpectralVector(np.real(np.fft.ifft(f.spectrum * g.spectrum)))


def convolve_direct(f: Sequence[float], g: Sequence[float]) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    N = f.size
    idx = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
    return g[idx] @ f


@dataclass(frozen=True)
class LargeSpectrum:
    R: tuple[int, ...]
    delta: float

    @property
    def size(self) -> int:
        return len(self.R)

    @property
    def ratio(self) -> float:
        """|R| * delta^(5/2); stays bounded when |R| grows like delta^(-5/2)."""
        return self.size * self.delta**2.5


def large_spectrum(a, delta: float) -> LargeSpectrum:
    if delta <= 0:
        raise ValueError("delta must be positive")
    R = np.flatnonzero(np.abs(_vec(a).spectrum) >= delta)
    return LargeSpectrum(tuple(int(r) for r in R), float(delta))


def _exact(x) -> Fraction:
    """Exact rational reading of a decimal-style parameter (0.1 means 1/10)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(str(x))


@dataclass(frozen=True, eq=False)
class BohrSet:
    N: int
    R: tuple[int, ...]
    epsilon: float
    members: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.members.size

    def __contains__(self, x: int) -> bool:
        return bool(np.isin(x % self.N, self.members))


def bohr_set(R: Iterable[int], epsilon, N: int) -> BohrSet:
    """{x in Z_N : ||x r / N|| <= epsilon for every r in R}, decided in integers."""
    eps = _exact(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    R = tuple(sorted({int(r) % N for r in R}))
    # ||xr/N|| <= eps  <=>  min(xr mod N, N - xr mod N) <= floor(eps N)
    bound = math.floor(eps * N)
    alive = np.arange(N, dtype=np.int64)
    for r in R:
        if alive.size == 1:
            break
        d = (alive * r) % N
        alive = alive[np.minimum(d, N - d) <= bound]
    return BohrSet(N, R, float(epsilon), alive)


def uniform_measure(B: BohrSet) -> SpectralVector:
    beta = np.zeros(B.N)
    beta[B.members] = 1.0 / B.size
    return SpectralVector(beta)


def mollify(a, beta) -> SpectralVector:
    """a * beta * beta."""
    a, beta = _vec(a), _vec(beta)
    _same_length(a, beta)
    return SpectralVector(np.real(np.fft.ifft(a.spectrum * beta.spectrum**2)))


def count_solutions(vectors: Sequence, n_prime: int) -> float:
    """sum over x_1 + ... + x_k = n' of prod a_i(x_i), via (1/N) sum_r prod a~_i(r) e(n' r / N)."""
    vs = [_vec(v) for v in vectors]
    N = _same_length(*vs)
    prod = np.ones(N, dtype=np.complex128)
    for v in vs:
        prod = prod * v.spectrum
    r = np.arange(N)
    twiddle = np.exp(2j * np.pi * ((n_prime * r) % N) / N)
    total = np.sum(prod * twiddle) / N
    # inputs are real, so any imaginary part is rounding; scale the check to the term sizes
    scale = max(1.0, float(np.sum(np.abs(prod))) / N)
    if abs(total.imag) >= 1e-6 * scale:
        raise SpectralPrecisionError(f"imaginary residue {total.imag:.3e} in spectral count")
    return float(total.real)


def count_solutions_direct(vectors: Sequence[Sequence[float]], n_prime: int) -> float:
    """Brute force over every (x_1, ..., x_{k-1}) with x_k forced; O(N^(k-1)) terms."""
    arrs = [np.asarray(v, dtype=np.float64) for v in vectors]
    k, N = len(arrs), arrs[0].size
    grids = np.meshgrid(*[np.arange(N)] * (k - 1), indexing="ij")
    term = np.ones(grids[0].shape)
    for a, g in zip(arrs[:-1], grids):
        term = term * a[g]
    last = (n_prime - sum(grids)) % N
    return float(np.sum(term * arrs[-1][last]))


@dataclass(frozen=True)
class DiscrepancyReport:
    count_raw: float
    count_mollified: float
    difference: float
    R_sizes: tuple[int, ...]
    B_sizes: tuple[int, ...]
    beta_tilde_max: tuple[float, ...]
    beta_bound: float
    mollified: tuple[SpectralVector, ...] = field(repr=False)


def mollification_discrepancy(vectors: Sequence, delta: float, epsilon, n_prime: int) -> DiscrepancyReport:
    """Raw and mollified weighted counts at n', and |1 - beta~(r)| over each large spectrum.

    Raises BoundViolation if some r in R_i has |1 - beta~_i(r)| > 16 epsilon^2.
    """
    vs = [_vec(v) for v in vectors]
    N = _same_length(*vs)
    bound = 16 * float(epsilon) ** 2
    mollified, R_sizes, B_sizes, bt = [], [], [], []
    for a in vs:
        spec = large_spectrum(a, delta)
        B = bohr_set(spec.R, epsilon, N)
        beta = uniform_measure(B)
        mollified.append(mollify(a, beta))
        R_sizes.append(spec.size)
        B_sizes.append(B.size)
        if spec.R:
            dev = float(np.max(np.abs(1.0 - beta.spectrum[list(spec.R)])))
        else:
            dev = 0.0
        bt.append(dev)
        if dev > bound:
            raise BoundViolation(
                f"|1 - beta~(r)| = {dev:.6g} exceeds 16 eps^2 = {bound:.6g} (|R| = {spec.size}, |B| = {B.size})"
            )
    raw = count_solutions(vs, n_prime)
    moll = count_solutions(mollified, n_prime)
    return DiscrepancyReport(
        count_raw=raw,
        count_mollified=moll,
        difference=abs(moll - raw),
        R_sizes=tuple(R_sizes),
        B_sizes=tuple(B_sizes),
        beta_tilde_max=tuple(bt),
        beta_bound=bound,
        mollified=tuple(mollified),
    )


def mollified_sup(a_prime) -> float:
    """N * max |a'(x)|."""
    v = _vec(a_prime)
    return float(v.N * np.max(np.abs(v.values)))


# -- dense sumset lower bound ------------------------------------------------


@dataclass(frozen=True)
class SumsetCountReport:
    count: int
    theta: float
    bound: float
    passed: bool


def _int_cyclic_convolve(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    N = f.size
    if N <= 2048:
        idx = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
        return g[idx] @ f
    c = np.rint(np.real(np.fft.ifft(np.fft.fft(f) * np.fft.fft(g))))
    return c.astype(np.int64)


def sumset_count_check(sets: Sequence[Iterable[int]], thetas: Sequence, n: int, N: int) -> SumsetCountReport:
    """Count (x_1..x_k) in X_1 x ... x X_k with sum n in Z_N against theta^(2k-3) N^(k-1)."""
    k = len(sets)
    if k < 2 or len(thetas) != k:
        raise HypothesisViolated("need k >= 2 sets with one theta each")
    th = [_exact(t) for t in thetas]
    if any(not (0 < t <= 1) for t in th):
        raise HypothesisViolated("every theta_i must lie in (0, 1]")
    if sum(th) <= 1:
        raise HypothesisViolated("theta_1 + ... + theta_k must exceed 1")
    theta = min(min(th), (sum(th) - 1) / (3 * k - 5))
    if N <= 2 / theta**2:
        raise HypothesisViolated(f"N = {N} must exceed 2 theta^-2 = {float(2 / theta**2):.6g}")
    if not is_prime(N):
        raise HypothesisViolated(f"N = {N} is not prime")
    ind = []
    for i, (X, t) in enumerate(zip(sets, th), 1):
        v = np.zeros(N, dtype=np.int64)
        v[[int(x) % N for x in X]] = 1
        if v.sum() < t * N:
            raise HypothesisViolated(f"|X_{i}| = {int(v.sum())} < theta_{i} N = {float(t * N):.6g}")
        ind.append(v)
    acc = ind[0]
    for v in ind[1:]:
        acc = _int_cyclic_convolve(acc, v)
    count = int(acc[n % N])
    bound = theta ** (2 * k - 3) * N ** (k - 1)
    return SumsetCountReport(count, float(theta), float(bound), count >= bound)
