import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from densegoldbach.errors import HypothesisViolated, LengthMismatch
from densegoldbach.primes import is_prime, lambda_weights, next_prime, sieve
from densegoldbach.rng import SplitMix64
from densegoldbach.spectral import (
    SpectralVector,
    bohr_set,
    convolve,
    convolve_direct,
    count_solutions,
    count_solutions_direct,
    dft,
    dft_direct,
    idft,
    large_spectrum,
    mollification_discrepancy,
    mollified_sup,
    mollify,
    sumset_count_check,
    uniform_measure,
)


def rand_vec(rng, N, lo=0.0, hi=1.0):
    return np.array([rng.uniform(lo, hi) for _ in range(N)])


def delta(N, a=0):
    v = np.zeros(N)
    v[a % N] = 1.0
    return v


def test_dft_examples():
    for N in (2, 7, 101):
        assert np.allclose(dft(delta(N)), 1)
        s = dft(np.ones(N))
        assert s[0] == pytest.approx(N) and np.allclose(s[1:], 0, atol=1e-9)


def test_dft_sign_convention():
    # delta at 1 has spectrum e(-r/N)
    N = 13
    r = np.arange(N)
    assert np.allclose(dft(delta(N, 1)), np.exp(-2j * np.pi * r / N), atol=1e-12)


@pytest.mark.parametrize("N", [2, 3, 17, 53, 101])
def test_dft_matches_direct(N):
    v = rand_vec(SplitMix64(N), N, -1, 1)
    assert np.allclose(dft(v), dft_direct(v), rtol=1e-9, atol=1e-9)


def test_parseval_10007():
    v = rand_vec(SplitMix64(7), 10007, -1, 1)
    s = dft(v)
    assert np.sum(np.abs(s) ** 2) == pytest.approx(10007 * np.sum(v**2), rel=1e-6)


def test_roundtrip_small_and_prime_lengths():
    rng = SplitMix64(1)
    for N in list(range(2, 102)) + [1009, 10007]:
        v = rand_vec(rng, N, -1, 1)
        back = idft(dft(v))
        assert np.max(np.abs(back - v)) <= 1e-9 * np.max(np.abs(v))


def test_convolve_examples():
    N = 11
    c = convolve(delta(N, 3), delta(N, 10))
    assert np.allclose(c.values, delta(N, 2), atol=1e-12)
    assert np.allclose(convolve(np.ones(N), np.ones(N)).values, N)
    with pytest.raises(LengthMismatch):
        convolve(np.ones(3), np.ones(4))


def test_convolve_matches_direct_53():
    rng = SplitMix64(53)
    f, g = rand_vec(rng, 53), rand_vec(rng, 53)
    c = convolve(f, g)
    assert np.allclose(c.values, convolve_direct(f, g), rtol=1e-9, atol=1e-12)
    assert np.allclose(dft(c), dft(f) * dft(g), rtol=1e-9, atol=1e-9)


def test_large_spectrum_examples():
    N = 31
    assert large_spectrum(np.full(N, 1 / N), 0.5).R == (0,)
    assert large_spectrum(delta(N), 0.5).R == tuple(range(N))
    a = lambda_weights(0, 1, 1009)
    spec = large_spectrum(a, 0.3)
    direct = tuple(int(r) for r in np.flatnonzero(np.abs(dft_direct(a)) >= 0.3))
    assert spec.R == direct and 0 in spec.R
    assert spec.ratio == pytest.approx(len(direct) * 0.3**2.5)
    with pytest.raises(ValueError):
        large_spectrum(a, 0)


def test_bohr_examples():
    assert bohr_set([0], 0.01, 13).size == 13
    assert bohr_set([1], 0.1, 11).members.tolist() == [0, 1, 10]
    assert bohr_set([1, 2, 5], 0.5, 17).size == 17
    assert bohr_set([], 0.1, 7).size == 7


def _bohr_oracle(R, eps, N):
    def dist(t):
        return abs(t - round(t))

    return [x for x in range(N) if all(dist(x * r / N) <= eps + 1e-12 for r in R)]


@pytest.mark.parametrize("N", [p for p in sieve(101) if p > 2][::3])
def test_bohr_invariants_exhaustive(N):
    rng = SplitMix64(N)
    for eps in (0.05, 0.1, 0.25):
        R = sorted({rng.randbelow(N) for _ in range(3)})
        B = bohr_set(R, eps, N)
        m = set(B.members.tolist())
        assert 0 in m and m == {(-x) % N for x in m}
        assert sorted(m) == _bohr_oracle(R, eps, N)
        R2 = R + [rng.randbelow(N)]
        assert set(bohr_set(R2, eps, N).members.tolist()) <= m


def test_bohr_boundary_is_exact():
    # eps N = 1 exactly: x = 1, r = 1 lies on the boundary and belongs to B
    assert 1 in bohr_set([1], 0.1, 10)
    assert 2 not in bohr_set([1], 0.1, 10)


def test_uniform_measure_sums_to_one():
    B = bohr_set([1, 3], 0.2, 31)
    assert uniform_measure(B).total() == pytest.approx(1.0)


def test_mollify_examples():
    rng = SplitMix64(3)
    a = rand_vec(rng, 101)
    assert np.allclose(mollify(a, delta(101)).values, a, atol=1e-12)
    flat = mollify(a, np.full(101, 1 / 101)).values
    assert np.allclose(flat, a.sum() / 101)


def test_mollify_bohr_101():
    rng = SplitMix64(101)
    a = rand_vec(rng, 101)
    beta = uniform_measure(bohr_set(large_spectrum(a, 3.0).R, 0.1, 101)).values
    ap = mollify(a, beta)
    assert ap.total() == pytest.approx(a.sum(), rel=1e-9)
    assert np.allclose(ap.values, convolve_direct(convolve_direct(a, beta), beta), atol=1e-12)
    assert np.all(ap.values >= -1e-15)
    assert mollified_sup(ap) <= 101 * a.max() + 1e-9


def test_count_examples():
    N = 5
    d1 = [delta(N, 1)] * 4
    assert count_solutions(d1, 4) == pytest.approx(1.0)
    for n in (0, 1, 2, 3):
        assert count_solutions(d1, n) == pytest.approx(0.0, abs=1e-12)
    assert count_solutions([np.ones(N)] * 4, 2) == pytest.approx(125.0)


def test_count_matches_brute_force_31():
    rng = SplitMix64(31)
    for _ in range(5):
        vs = [rand_vec(rng, 31) for _ in range(4)]
        n = rng.randbelow(31)
        assert count_solutions(vs, n) == pytest.approx(count_solutions_direct(vs, n), abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.sampled_from([2, 3, 5, 7, 11]), st.integers(0, 2**64 - 1))
def test_count_identity_other_arities(k, N, seed):
    rng = SplitMix64(seed)
    vs = [rand_vec(rng, N, -1, 1) for _ in range(k)]
    n = rng.randbelow(N)
    assert count_solutions(vs, n) == pytest.approx(count_solutions_direct(vs, n), abs=1e-9)


def test_discrepancy_degenerate_cases():
    N = 31
    rng = SplitMix64(5)
    vs = [rand_vec(rng, N) for _ in range(4)]
    # every frequency is large, and eps below 1/N leaves B = {0}
    rep = mollification_discrepancy(vs, 1e-9, 0.01, 7)
    assert rep.B_sizes == (1,) * 4 and rep.difference == pytest.approx(0, abs=1e-12)
    const = [np.full(N, 0.3)] * 4
    rep = mollification_discrepancy(const, 0.5, 0.2, 3)
    assert rep.difference == pytest.approx(0, abs=1e-9)


def test_discrepancy_report_fields():
    N = 1009
    a = lambda_weights(0, 1, N)
    a[N // 2 :] = 0
    rep = mollification_discrepancy([a] * 4, 0.2, 0.04, 500)
    assert rep.count_raw > 0 and rep.difference == abs(rep.count_mollified - rep.count_raw)
    assert all(b <= rep.beta_bound for b in rep.beta_tilde_max)
    for ap in rep.mollified:
        assert ap.total() == pytest.approx(a.sum(), rel=1e-9)


def test_mollified_sup_examples():
    assert mollified_sup(np.full(17, 1 / 17)) == pytest.approx(1.0)
    assert mollified_sup(delta(17)) == 17


def test_sumset_count_documented_instance():
    X = list(range(32))
    r = sumset_count_check([X, X], [0.6, 0.6], 0, 53)
    assert r.count == 11 and r.bound == pytest.approx(10.6) and r.passed
    # brute-force pair count
    assert sum((x + y) % 53 == 0 for x in X for y in X) == 11


@pytest.mark.parametrize(
    "sets,thetas,N",
    [
        ([range(32)] * 2, [0.6, 0.6], 47),  # N <= 2 theta^-2 = 50
        ([range(32)] * 2, [0.6, 0.6], 57),  # not prime
        ([range(20)] * 2, [0.6, 0.6], 53),  # |X| < theta N
        ([range(32)] * 2, [0.5, 0.5], 53),  # sum of thetas not above 1
        ([range(32)], [0.9], 53),  # k = 1
        ([range(32)] * 2, [0.6, 1.2], 53),  # theta outside (0, 1]
    ],
)
def test_sumset_count_hypotheses(sets, thetas, N):
    with pytest.raises(HypothesisViolated):
        sumset_count_check(sets, thetas, 0, N)


def test_sumset_count_k4_admissible_prime():
    N = next_prime(2450)
    rng = SplitMix64(4)
    for _ in range(5):
        sets = [rng.sample(range(N), math.ceil(0.3 * N)) for _ in range(4)]
        n = rng.randbelow(N)
        r = sumset_count_check(sets, [0.3] * 4, n, N)
        # oracle: linear numpy convolution folded mod N
        acc = np.zeros(N, dtype=np.int64)
        acc[sets[0]] = 1
        for X in sets[1:]:
            ind = np.zeros(N, dtype=np.int64)
            ind[X] = 1
            lin = np.convolve(acc, ind)
            acc = lin[:N].copy()
            acc[: lin.size - N] += lin[N:]
        assert r.count == acc[n] and r.passed


def test_sumset_count_brute_force_small():
    rng = SplitMix64(11)
    for k, N, th in [(2, 59, 0.6), (3, 61, 0.6), (4, 61, 0.6)]:
        sets = [sorted(rng.sample(range(N), math.ceil(th * N))) for _ in range(k)]
        n = rng.randbelow(N)
        r = sumset_count_check(sets, [th] * k, n, N)
        brute = sum(1 for xs in product(*sets[:-1]) if (n - sum(xs)) % N in set(sets[-1]))
        assert r.count == brute


def test_columnar_roundtrip():
    v = SpectralVector(rand_vec(SplitMix64(9), 13, -1, 1))
    text = v.to_columnar()
    assert text.startswith("index,value\n") and text.count("\n") == 14
    back = SpectralVector.from_columnar(text)
    assert np.array_equal(back.values, v.values)
    sparse = SpectralVector.from_columnar("index,value\n3,0.5\n", 7)
    assert sparse.values.tolist() == [0, 0, 0, 0.5, 0, 0, 0]
    with pytest.raises(ValueError):
        SpectralVector.from_columnar("9,1.0\n", 7)


def test_vector_is_immutable():
    v = SpectralVector([1.0, 2.0])
    with pytest.raises(ValueError):
        v.values[0] = 3.0
    assert is_prime(next_prime(10))
