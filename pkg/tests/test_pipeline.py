import math
from itertools import product

import numpy as np
import pytest

from densegoldbach.errors import HypothesisViolated, LimitTooSmall, NoPrimeInRange, PreconditionViolated
from densegoldbach.pipeline import (
    PipelineConfig,
    build_weighted_sets,
    choose_W,
    compute_kappa,
    level_set,
    run_pipeline,
    select_N,
    select_residues,
)
from densegoldbach.primes import all_primes, empty_subset, is_prime, parse_subset, residue_class_subset
from densegoldbach.representation import RepresentationFinder, find_representation_direct, verify_representation
from densegoldbach.residue import ResidueFunction
from densegoldbach.spectral import SpectralVector


def test_compute_kappa():
    k, alpha = compute_kappa([0.6, 0.6, 0.7, 0.7])
    assert k == pytest.approx(2e-5, rel=1e-12)
    assert alpha[0] == pytest.approx(0.6 / (1 + 4e-5))
    with pytest.raises(HypothesisViolated):
        compute_kappa([0.5, 0.5, 0.9, 0.9])
    assert compute_kappa([1, 1, 1, 1])[0] == pytest.approx(1e-4)
    with pytest.raises(ValueError):
        compute_kappa([1.2, 1, 1, 1])


def test_choose_W():
    w, W = choose_W(10**6)
    assert w == pytest.approx(0.25 * math.log(math.log(10**6))) and abs(w - 0.657) < 1e-3 and W == 1
    assert choose_W(100, PipelineConfig(w_override=5))[1] == 30
    assert choose_W(100, PipelineConfig(w_override=7))[1] == 210
    assert choose_W(8, PipelineConfig(w_override=1))[1] == 1
    with pytest.raises(PreconditionViolated):
        choose_W(10)


def test_config_validation():
    for kw in ({"kappa": 0}, {"delta": -1}, {"epsilon": 0}, {"clamp_policy": "loose"}):
        with pytest.raises(ValueError):
            PipelineConfig(**kw)


def test_select_residues_w1():
    f = ResidueFunction.constant(1, 0.9)
    assert select_residues(100, [f] * 4, 1) == (0, 0, 0, 0)


def test_select_residues_w6_exhaustive():
    fs = [ResidueFunction(6, (0.9, 0.3)), ResidueFunction(6, (0.4, 0.95)), ResidueFunction(6, (0.7, 0.7)), ResidueFunction(6, (1.0, 0.2))]
    for n in range(0, 60, 2):
        b = select_residues(n, fs, 6)
        feasible = {
            x
            for x in product((1, 5), repeat=4)
            if sum(x) % 6 == n % 6 and sum(f(xi) for f, xi in zip(fs, x)) > 2 and all(f(xi) > 0 for f, xi in zip(fs, x))
        }
        assert b in feasible


def test_select_residues_mean_exactly_one():
    fs = [ResidueFunction(6, (1.0, 0.0))] * 4
    with pytest.raises(HypothesisViolated):
        select_residues(10, fs, 6)


def test_select_N():
    assert select_N(100, 1, 0.5) == 151
    assert select_N(1000, 1, 0.01) == 1013
    assert select_N(6000, 6, 0.01) == 1013
    with pytest.raises(NoPrimeInRange):
        select_N(24, 1, 0.01)
    with pytest.raises(NoPrimeInRange):
        select_N(114, 1, 0.02)  # [117, 118]


def test_build_weighted_sets_empty():
    ws = build_weighted_sets(1000, [empty_subset(500)] * 4, (0, 0, 0, 0), 1, 1013, 1e-4)
    assert all(A.size == 0 for A in ws.A) and ws.alpha_prime == (0.0,) * 4
    assert ws.alpha_floor == (False,) * 4 and not ws.sum_alpha


def test_build_weighted_sets_direct_sum():
    n = 2 * 10**4
    N = select_N(n, 1, 1e-4 * 64)
    ws = build_weighted_sets(n, [all_primes(n // 2)] * 4, (0, 0, 0, 0), 1, N, 1e-4)
    direct = math.fsum(math.log(p) / N for p in range(2, n // 2 + 1) if is_prime(p))
    assert ws.alpha_prime[0] == pytest.approx(direct, rel=1e-12)
    assert abs(ws.alpha_prime[0] - 0.5 * (n / 2) / N) < 0.25


def test_build_weighted_sets_membership():
    n, W = 3000, 6
    Ps = [residue_class_subset(n // 2, 5, [1, 2, 3])] * 4
    b = (1, 5, 1, 5)
    N = select_N(n, W, 1e-2)
    ws = build_weighted_sets(n, Ps, b, W, N, 1e-4)
    for A, bi, P, a in zip(ws.A, b, Ps, ws.a):
        for x in A:
            p = W * int(x) + bi
            assert is_prime(p) and p in P and p <= n // 2
        assert np.count_nonzero(a.values) == A.size
    with pytest.raises(LimitTooSmall):
        build_weighted_sets(n, [all_primes(100)] * 4, b, W, N, 1e-4)


def test_level_set_examples():
    N = 101
    ls = level_set(np.full(N, 0.4 / N), 0.4, 1.0)
    assert ls.size == N and ls.sup_condition and ls.size_check
    d = np.zeros(N)
    d[0] = 0.4
    ls = level_set(d, 0.4, 1e-3)
    assert ls.members.tolist() == [0] and not ls.sup_condition and ls.size_check is None
    with pytest.raises(ValueError):
        level_set(d, 0.5, 1e-3)


def test_pipeline_level_sets_at_1009():
    n = 1000
    st = run_pipeline(n, [all_primes(n)] * 4)
    assert st.N == 1009
    for ls, ap, alpha in zip(st.level_sets, st.discrepancy.mollified, st.alpha_prime):
        assert isinstance(ap, SpectralVector)
        assert ls.size == np.count_nonzero(ap.values >= alpha * st.kappa / st.N)
        if ls.sup_condition:
            assert ls.size_check


def _check_state(st, n, subsets):
    W = st.W
    assert (n - sum(st.b)) % W == 0 and st.n_prime * W + sum(st.b) == n
    assert is_prime(st.N)
    assert (1 + st.kappa_N) * n / W <= st.N + 1e-9 and st.N <= (1 + 2 * st.kappa_N) * n / W + 1e-9
    for A, bi, a, alpha in zip(st.A, st.b, st.a, st.alpha_prime):
        if A.size:
            assert W * int(A.max()) + bi <= n // 2
        assert alpha == pytest.approx(a.total(), rel=1e-12)
    assert sum(int(A.max()) if A.size else 0 for A in st.A) < st.N + st.n_prime
    if st.representation is not None:
        assert verify_representation(n, subsets, st.representation)


def test_pipeline_small_examples():
    P = [all_primes(8)] * 4
    st = run_pipeline(8, P, PipelineConfig(w_override=1))
    assert st.representation == (2, 2, 2, 2)
    _check_state(st, 8, P)
    odd = [parse_subset("minus(2)", 100)] * 4
    st = run_pipeline(100, odd)
    assert st.representation is not None and all(p % 2 for p in st.representation)
    _check_state(st, 100, odd)


def test_pipeline_sharpness_example():
    n = 300
    P = [parse_subset("mod 3: 1", n)] * 3 + [parse_subset("minus(3)", n)]
    st = run_pipeline(n, P)
    assert st.representation is None and st.support_count == 0
    assert abs(st.count_raw) < 1e-12
    assert any("density hypothesis" in d for d in st.deviations)
    with pytest.raises(HypothesisViolated):
        run_pipeline(n, P, PipelineConfig(strict=True))


def test_pipeline_w_trick_run():
    n = 30000
    P = [residue_class_subset(n, 5, [1, 2, 3])] * 4
    st = run_pipeline(n, P, PipelineConfig(w_override=5))
    assert st.W == 30 and all(math.gcd(b, 30) == 1 for b in st.b)
    assert all(f(b) > 0 for f, b in zip(st.f_tables, st.b))
    assert sum(f(b) for f, b in zip(st.f_tables, st.b)) > 2
    assert st.representation is not None
    assert any("w overridden" in d for d in st.deviations)
    _check_state(st, n, P)


def test_pipeline_rejects_bad_input():
    P = [all_primes(100)] * 4
    with pytest.raises(PreconditionViolated):
        run_pipeline(101, P)
    with pytest.raises(LimitTooSmall):
        run_pipeline(1000, P)


def test_report_schema(validate_report):
    n = 2000
    P = [all_primes(n)] * 4
    rep = run_pipeline(n, P, PipelineConfig(w_override=3)).to_report()
    assert list(rep) == ["n", "kappa", "w", "W", "b", "N", "n_prime", "alpha_prime", "counts", "bounds", "representation", "deviations"]
    validate_report(rep, "pipeline")


def _tuned_w(n):
    # W = 6, 30, 210 once n is large enough for every residue class to be reachable
    return 7 if n >= 600 else 5 if n >= 80 else 3 if n >= 24 else 1


def test_oracle_agreement_all_primes():
    limit = 5000
    P = [all_primes(limit)] * 4
    finder = RepresentationFinder(P, limit)
    for n in range(8, limit + 1, 2):
        st = run_pipeline(n, P, PipelineConfig(w_override=1))
        assert (st.representation is None) == (finder.find(n) is None), n
        _check_state(st, n, P)
    for n in range(8, limit + 1, 26):
        st = run_pipeline(n, P, PipelineConfig(w_override=_tuned_w(n)))
        assert (st.representation is None) == (finder.find(n) is None), n
        _check_state(st, n, P)


def test_direct_finder_examples():
    assert find_representation_direct(8, [all_primes(8)] * 4) == (2, 2, 2, 2)
    assert find_representation_direct(10, [all_primes(10)] * 4) == (2, 2, 3, 3)
    odd = [parse_subset("minus(2)", 100)] * 4
    rep = find_representation_direct(100, odd)
    assert rep == (3, 3, 5, 89)
    # lexicographic minimality by enumeration
    ps = [p for p in range(3, 100) if is_prime(p)]
    assert rep == min(t for t in product(ps, repeat=3) for t in [t + (100 - sum(t),)] if is_prime(t[3]) and t[3] > 2)
    assert find_representation_direct(6, [all_primes(6)] * 4) is None


def test_direct_finder_counts_match_enumeration():
    n = 60
    P = [parse_subset("mod 3: 1", n)] * 2 + [all_primes(n)] * 2
    finder = RepresentationFinder(P, n)
    ps = [[p for p in range(n + 1) if p in Q] for Q in P]
    for m in range(0, n + 1):
        brute = sum(1 for a, b, c in product(*ps[:3]) if m - a - b - c in set(ps[3]))
        assert finder.count(m) == brute


def test_sharpness_families_small():
    n = 3000
    fam1 = [residue_class_subset(n, 3, [1])] * 3 + [parse_subset("minus(3)", n)]
    fam2 = [empty_subset(n)] + [parse_subset("minus(2)", n)] * 3
    f1, f2 = RepresentationFinder(fam1, n), RepresentationFinder(fam2, n)
    for m in range(6, n + 1, 2):
        if m % 3 == 0:
            assert f1.count(m) == 0
        assert f2.count(m) == 0
