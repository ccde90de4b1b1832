"""Desk-scale run of the transference argument for four concrete prime subsets.

Stages: kappa and alpha_i from densities, W-trick modulus, residue tables
f_i(b), residues b_i from the local corollary, prime N, weighted vectors
a_i = 1_{A_i} lambda, raw and mollified quadruple counts at n', level sets,
and finally a decoded representation n = p1 + p2 + p3 + p4.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Literal, Sequence

import numpy as np

from .errors import (
    HypothesisViolated,
    InternalContradiction,
    LimitTooSmall,
    NoPrimeInRange,
    NonSquarefreeW,
    PreconditionViolated,
)
from .local import solve_corollary1
from .primes import (
    PrimeSubset,
    density_estimate,
    is_prime,
    lambda_weights,
    prime_mask,
    sieve,
    wtrick_statistics,
)
from .representation import QuadrupleDecoder, verify_representation
from .residue import ResidueFunction, factorize, units
from .spectral import (
    DiscrepancyReport,
    SpectralVector,
    mollification_discrepancy,
    mollified_sup,
)

log = logging.getLogger(__name__)

KAPPA_SCALE = 1e-4


@dataclass(frozen=True)
class PipelineConfig:
    kappa: float | None = None  # None: derived from the subset densities
    w_override: float | None = None
    delta: float | None = None  # None: 1 / log N
    epsilon: float | None = None  # None: delta ** 2
    clamp_policy: Literal["warn", "strict"] = "warn"
    strict: bool = False  # raise on hypothesis failures instead of logging a deviation

    def __post_init__(self) -> None:
        if self.kappa is not None and self.kappa <= 0:
            raise ValueError("explicit kappa must be positive")
        for name in ("delta", "epsilon"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")
        if self.clamp_policy not in ("warn", "strict"):
            raise ValueError("clamp_policy is 'warn' or 'strict'")


def compute_kappa(d: Sequence[float]) -> tuple[float, tuple[float, ...]]:
    """kappa = 1e-4 * min(d1 + d2 - 1, d3 + d4 - 1) and alpha_i = d_i / (1 + 2 kappa)."""
    if len(d) != 4 or any(not 0 <= x <= 1 for x in d):
        raise ValueError("need four densities in [0, 1]")
    if d[0] + d[1] <= 1 or d[2] + d[3] <= 1:
        raise HypothesisViolated(f"density sums {d[0] + d[1]:.6g}, {d[2] + d[3]:.6g} must both exceed 1")
    kappa = min(KAPPA_SCALE * (d[0] + d[1] - 1), KAPPA_SCALE * (d[2] + d[3] - 1))
    return kappa, tuple(x / (1 + 2 * kappa) for x in d)


def choose_W(n: int, config: PipelineConfig = PipelineConfig()) -> tuple[float, int]:
    """w = (1/4) log log n unless overridden; W = product of primes <= w."""
    if config.w_override is not None:
        w = float(config.w_override)
    else:
        if n < 16:
            raise PreconditionViolated(f"n = {n} < 16; pass a w override")
        w = 0.25 * math.log(math.log(n))
    W = 1
    for p in sieve(max(int(math.floor(w)), 1)):
        W *= int(p)
    if config.w_override is None and W > math.log(n):
        raise InternalContradiction(f"W = {W} exceeds log n = {math.log(n):.4g}")
    return w, W


def select_residues(n: int, f_tables: Sequence[ResidueFunction], W: int) -> tuple[int, ...]:
    """b_i in Z_W^* with n = b1 + b2 + b3 + b4 (mod W), sum f_i(b_i) > 2, every f_i(b_i) > 0."""
    if W == 1:
        return (0, 0, 0, 0)
    if not factorize(W).squarefree:
        raise NonSquarefreeW(f"W = {W} has a square factor")
    sol = solve_corollary1(W, f_tables, n % W)
    return sol.x


def _fallback_residues(n: int, f_tables: Sequence[ResidueFunction], W: int) -> tuple[int, ...]:
    """Best available tuple when the local hypotheses fail: max sum f_i(b_i), positives preferred."""
    best, best_key = None, None
    for b1, b2, b3 in product(units(W), repeat=3):
        b4 = (n - b1 - b2 - b3) % W
        if math.gcd(b4, W) != 1:
            continue
        vals = [f(b) for f, b in zip(f_tables, (b1, b2, b3, b4))]
        key = (all(v > 0 for v in vals), sum(vals))
        if best_key is None or key > best_key:
            best, best_key = (b1, b2, b3, b4), key
    return best


def select_N(n: int, W: int, kappa: float) -> int:
    """Smallest prime in [ceil((1 + kappa) n / W), floor((1 + 2 kappa) n / W)]."""
    k = Fraction(kappa)
    lo = math.ceil((1 + k) * n / W)
    hi = math.floor((1 + 2 * k) * n / W)
    for N in range(max(lo, 2), hi + 1):
        if is_prime(N):
            return N
    raise NoPrimeInRange(f"no prime in [{lo}, {hi}]")


@dataclass(frozen=True, eq=False)
class WeightedSets:
    A: tuple[np.ndarray, ...]
    a: tuple[SpectralVector, ...]
    alpha_prime: tuple[float, ...]
    alpha_floor: tuple[bool, ...]
    sum_alpha: bool


def build_weighted_sets(
    n: int, subsets: Sequence[PrimeSubset], b: Sequence[int], W: int, N: int, kappa: float
) -> WeightedSets:
    """A_i = {x >= 0 : W x + b_i in P_i, W x + b_i <= n/2}, a_i = 1_{A_i} lambda_{b_i, W, N}."""
    half = n // 2
    mask = prime_mask(max(W * (N - 1) + max(b), half))
    A, a, alpha = [], [], []
    for i, (P, bi) in enumerate(zip(subsets, b), 1):
        if P.limit < half:
            raise LimitTooSmall(f"P{i} sieved to {P.limit}, need {half}")
        x = np.arange((half - bi) // W + 1 if half >= bi else 0, dtype=np.int64)
        vals = W * x + bi
        Ai = x[P.membership[vals]]
        lam = lambda_weights(bi, W, N, mask)
        ai = np.zeros(N)
        ai[Ai] = lam[Ai]
        A.append(Ai)
        a.append(SpectralVector(ai))
        alpha.append(math.fsum(ai))
    return WeightedSets(
        A=tuple(A),
        a=tuple(a),
        alpha_prime=tuple(alpha),
        alpha_floor=tuple(x >= kappa for x in alpha),
        sum_alpha=sum(alpha) > 1 + 3 * kappa,
    )


@dataclass(frozen=True)
class LevelSet:
    members: np.ndarray = field(repr=False)
    threshold: float
    sup_scaled: float
    sup_condition: bool
    size_bound: float
    size_check: bool | None

    @property
    def size(self) -> int:
        return int(self.members.size)


def level_set(a_prime, alpha_prime: float, kappa: float) -> LevelSet:
    """A' = {x : a'(x) >= alpha' kappa / N}, with the size bound checked when N max a' <= 1 + kappa."""
    v = a_prime if isinstance(a_prime, SpectralVector) else SpectralVector(a_prime)
    total = v.total()
    if abs(total - alpha_prime) > 1e-9 * max(1.0, abs(alpha_prime)):
        raise ValueError(f"alpha' = {alpha_prime} differs from the mass {total} of a'")
    N = v.N
    thr = alpha_prime * kappa / N
    members = np.flatnonzero(v.values >= thr)
    sup = mollified_sup(v)
    cond = sup <= 1 + kappa
    bound = alpha_prime * (1 - kappa) * N / (1 + kappa)
    return LevelSet(members, thr, sup, cond, bound, (members.size >= bound) if cond else None)


@dataclass(eq=False)
class PipelineState:
    n: int
    densities: tuple[float, ...] = ()
    kappa: float = 0.0
    kappa_N: float = 0.0
    alpha: tuple[float, ...] = ()
    w: float = 0.0
    W: int = 1
    f_tables: tuple[ResidueFunction, ...] = ()
    b: tuple[int, ...] = ()
    N: int = 0
    n_prime: int = 0
    A: tuple[np.ndarray, ...] = ()
    a: tuple[SpectralVector, ...] = ()
    alpha_prime: tuple[float, ...] = ()
    alpha_floor: tuple[bool, ...] = ()
    sum_alpha: bool = False
    delta: float = 0.0
    epsilon: float = 0.0
    discrepancy: DiscrepancyReport | None = None
    sup_scaled: tuple[float, ...] = ()
    level_sets: tuple[LevelSet, ...] = ()
    support_count: int = 0
    representation: tuple[int, int, int, int] | None = None
    deviations: list[str] = field(default_factory=list)

    @property
    def count_raw(self) -> float:
        return self.discrepancy.count_raw if self.discrepancy else 0.0

    @property
    def count_mollified(self) -> float:
        return self.discrepancy.count_mollified if self.discrepancy else 0.0

    def to_report(self) -> dict:
        d = self.discrepancy
        return {
            "n": self.n,
            "kappa": self.kappa,
            "w": self.w,
            "W": self.W,
            "b": list(self.b),
            "N": self.N,
            "n_prime": self.n_prime,
            "alpha_prime": list(self.alpha_prime),
            "counts": {
                "raw": d.count_raw,
                "mollified": d.count_mollified,
                "discrepancy": d.difference,
            },
            "bounds": {
                "alpha_floor": list(self.alpha_floor),
                "sum_alpha": self.sum_alpha,
                "beta_tilde_max": max(d.beta_tilde_max),
            },
            "representation": list(self.representation) if self.representation else None,
            "deviations": list(self.deviations),
        }


def _deviate(state: PipelineState, msg: str) -> None:
    log.info("deviation: %s", msg)
    state.deviations.append(msg)


def run_pipeline(n: int, subsets: Sequence[PrimeSubset], config: PipelineConfig = PipelineConfig()) -> PipelineState:
    if n % 2 or n < 8:
        raise PreconditionViolated(f"n must be an even integer >= 8, got {n}")
    if len(subsets) != 4:
        raise ValueError("need four prime subsets")
    half = n // 2
    for i, P in enumerate(subsets, 1):
        if P.limit < half:
            raise LimitTooSmall(f"P{i} sieved to {P.limit}, need {half}")
    st = PipelineState(n=n)

    st.densities = tuple(density_estimate(P, half).ratio for P in subsets)
    d = st.densities
    if config.kappa is not None:
        st.kappa = float(config.kappa)
        _deviate(st, f"kappa set explicitly to {st.kappa}")
        st.alpha = tuple(x / (1 + 2 * st.kappa) for x in d)
    else:
        try:
            st.kappa, st.alpha = compute_kappa(d)
        except HypothesisViolated as exc:
            if config.strict:
                raise
            st.kappa = KAPPA_SCALE
            st.alpha = tuple(x / (1 + 2 * st.kappa) for x in d)
            _deviate(st, f"density hypothesis fails ({exc}); kappa falls back to {KAPPA_SCALE}")

    st.w, st.W = choose_W(n, config)
    W = st.W
    if config.w_override is not None:
        _deviate(st, f"w overridden to {config.w_override} (W = {W})")

    stats = [wtrick_statistics(P, n, W, st.kappa) for P in subsets]
    st.f_tables = tuple(s.f for s in stats)
    for i, s in enumerate(stats, 1):
        if s.clamped:
            if config.clamp_policy == "strict":
                raise HypothesisViolated(f"f{i} exceeds 1 at residues {list(s.clamped)}")
            _deviate(st, f"f{i} clamped to 1 at residues {list(s.clamped)}")

    try:
        st.b = select_residues(n, st.f_tables, W)
    except HypothesisViolated as exc:
        if config.strict:
            raise
        st.b = _fallback_residues(n, st.f_tables, W)
        _deviate(st, f"local hypotheses fail mod {W} ({exc}); residues chosen by direct search")
    if W == 1:
        means = [float(f.exact_mean) for f in st.f_tables]
        if means[0] + means[1] <= 1 or means[2] + means[3] <= 1:
            _deviate(st, "W = 1: residue-table means do not exceed 1 (no local constraint to solve)")

    if (n - sum(st.b)) % W:
        raise InternalContradiction("residues do not sum to n mod W")
    st.n_prime = (n - sum(st.b)) // W
    if st.n_prime < 0:
        raise PreconditionViolated(f"n = {n} too small for W = {W}: n' < 0")

    st.kappa_N = st.kappa
    while True:
        try:
            st.N = select_N(n, W, st.kappa_N)
            break
        except NoPrimeInRange:
            if config.strict:
                raise
            st.kappa_N *= 2
    if st.kappa_N != st.kappa:
        _deviate(st, f"no prime N in the kappa window; widened to kappa_N = {st.kappa_N:g} (N = {st.N})")

    ws = build_weighted_sets(n, subsets, st.b, W, st.N, st.kappa)
    st.A, st.a, st.alpha_prime = ws.A, ws.a, ws.alpha_prime
    st.alpha_floor, st.sum_alpha = ws.alpha_floor, ws.sum_alpha
    _check_no_wrap(st)

    st.delta = config.delta if config.delta is not None else 1.0 / math.log(st.N)
    st.epsilon = config.epsilon if config.epsilon is not None else st.delta**2
    st.discrepancy = mollification_discrepancy(st.a, st.delta, st.epsilon, st.n_prime % st.N)
    st.sup_scaled = tuple(mollified_sup(ap) for ap in st.discrepancy.mollified)
    st.level_sets = tuple(
        level_set(ap, al, st.kappa) for ap, al in zip(st.discrepancy.mollified, st.alpha_prime)
    )

    supports = []
    for Ai in st.A:
        ind = np.zeros(st.n_prime + 1, dtype=bool)
        ind[Ai[Ai <= st.n_prime]] = True
        supports.append(ind)
    dec = QuadrupleDecoder(supports, st.n_prime)
    st.support_count = dec.count(st.n_prime)
    x = dec.find(st.n_prime)
    if x is not None:
        rep = tuple(W * xi + bi for xi, bi in zip(x, st.b))
        if not verify_representation(n, subsets, rep):
            raise InternalContradiction(f"decoded {rep} is not a valid representation of {n}")
        st.representation = rep
    return st


def _check_no_wrap(st: PipelineState) -> None:
    W, n, N = st.W, st.n, st.N
    tops = [int(Ai.max()) if Ai.size else 0 for Ai in st.A]
    for Ai, bi in zip(st.A, st.b):
        if Ai.size and W * int(Ai.max()) + bi > n // 2:
            raise InternalContradiction("A_i extends past n / 2")
    if not (1 + Fraction(st.kappa_N)) * n <= N * W:
        raise InternalContradiction(f"N = {N} below (1 + kappa) n / W")
    # x_1 + ... + x_4 <= sum of maxima < N + n' rules out sums n' + kN with k != 0
    if sum(tops) >= N + st.n_prime:
        raise InternalContradiction("quadruple sums could wrap modulo N")
