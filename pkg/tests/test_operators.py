import math
import random

import pytest

from varlp import (
    Constant,
    EmptyColumn,
    ExponentSequence,
    LampertiOperator,
    MatrixOperator,
    OutOfDomain,
    Permutation,
    RegimeViolation,
    RegularSetIso,
    Shift,
    SparseSequence,
    SupportOverlap,
    Table,
    TruncationBreach,
    Verdict,
    apply_injection,
    apply_lamperti,
    basis_vector,
    check_isometry_randomized,
    check_isomodular_structural,
    injection_to_matrix,
    lamperti_to_matrix,
    luxemburg_norm,
    modular,
    recover_structure,
    theta_isometry_decision,
)
from varlp.operators import WITNESS_GAP, adjacent_transpositions, modular_mismatch, shift_is_isometric
from varlp.sampling import random_exponents, random_sparse, trial_rng
from varlp.space import Regime
from varlp.verify import random_isomodular_lamperti

from .oracles import bisect_root

C = 2 ** (-1 / 3)
CUBE = ExponentSequence.constant(3)
ONE_THEN_THREE = ExponentSequence((1,), Constant(3))
EXAMPLE_L = LampertiOperator(SparseSequence({2: C, 3: C}), RegularSetIso([{2, 3}]))


def test_apply_lamperti_examples():
    ident = LampertiOperator(SparseSequence({1: 1, 2: 1, 3: 1}), RegularSetIso.identity(3))
    x = SparseSequence({1: 2 - 1j, 3: 0.5})
    assert apply_lamperti(ident, x) == x
    assert apply_lamperti(EXAMPLE_L, basis_vector(1)) == SparseSequence({2: C, 3: C})
    assert modular(apply_lamperti(EXAMPLE_L, basis_vector(1)), CUBE) == pytest.approx(1.0, abs=1e-15)
    assert apply_lamperti(EXAMPLE_L, SparseSequence.zero()) == SparseSequence.zero()
    with pytest.raises(OutOfDomain):
        apply_lamperti(EXAMPLE_L, basis_vector(2))


def test_lamperti_invariants_enforced():
    with pytest.raises(ValueError):
        LampertiOperator(SparseSequence({1: 1.2}), RegularSetIso([{1}]))
    with pytest.raises(ValueError):
        LampertiOperator(SparseSequence({2: 0.5}), RegularSetIso([{1}]))


def test_apply_injection_examples():
    a1, a2 = 0.3 + 1j, -2.0
    assert apply_injection(Shift(1), SparseSequence({1: a1, 2: a2})) == SparseSequence({2: a1, 3: a2})
    gamma = adjacent_transpositions(3)
    assert [gamma(n) for n in range(1, 7)] == [2, 1, 4, 3, 6, 5]
    assert apply_injection(gamma, basis_vector(1)) == basis_vector(2)
    ident = Table({1: 1, 2: 2, 3: 3})
    x = SparseSequence({1: 1j, 3: 4})
    assert apply_injection(ident, x) == x
    with pytest.raises(OutOfDomain):
        apply_injection(ident, basis_vector(4))


def test_injection_rules_validated():
    with pytest.raises(ValueError):
        Table({1: 2, 2: 2})
    with pytest.raises(ValueError):
        Permutation({1: 2, 2: 3})
    with pytest.raises(ValueError):
        Shift(0)
    assert Permutation({1: 2, 2: 1})(7) == 7


def test_to_matrix_examples():
    with pytest.raises(TruncationBreach):
        injection_to_matrix(Shift(1), 3)
    M = injection_to_matrix(Shift(1), 3, n_columns=2)
    assert M.columns == {1: basis_vector(2), 2: basis_vector(3)}
    ident = injection_to_matrix(Table({1: 1, 2: 2}), 2)
    assert ident.columns == {1: basis_vector(1), 2: basis_vector(2)}
    L = lamperti_to_matrix(EXAMPLE_L, 3)
    assert L.columns == {1: SparseSequence({2: C, 3: C})}
    with pytest.raises(TruncationBreach):
        lamperti_to_matrix(EXAMPLE_L, 2)


def test_structural_certificate_examples():
    perm = injection_to_matrix(Permutation({1: 3, 2: 1, 3: 2}), 3)
    assert check_isomodular_structural(perm, CUBE).verdict is Verdict.ISOMODULAR

    M = lamperti_to_matrix(EXAMPLE_L, 3)
    cert = check_isomodular_structural(M, CUBE)
    assert cert.verdict is Verdict.ISOMODULAR
    assert cert.detail[0].column_modular == pytest.approx(1.0, abs=1e-15)
    for t in range(200):
        x = SparseSequence({1: complex(*trial_rng(1, "x", t).sample(range(-9, 10), 2))})
        assert modular_mismatch(M, CUBE, x) <= 1e-10

    shift = injection_to_matrix(Shift(1), 4, n_columns=3)
    cert = check_isomodular_structural(shift, ONE_THEN_THREE)
    assert cert.verdict is Verdict.NOT_ISOMODULAR
    assert cert.witness == SparseSequence({1: 2})
    assert cert.witness_modulars == (2.0, 8.0)
    # basis vectors alone cannot expose it
    assert modular(shift.apply(basis_vector(1)), ONE_THEN_THREE) == modular(basis_vector(1), ONE_THEN_THREE)


def test_inconclusive_when_no_witness_found():
    mixed = ExponentSequence.periodic([1.5, 3])
    shift = injection_to_matrix(Shift(1), 3, n_columns=2)
    cert = check_isomodular_structural(shift, mixed, threshold=1e300)
    assert cert.verdict is Verdict.INCONCLUSIVE and cert.witness is None


def test_overlapping_columns_not_isomodular_in_restricted_regime():
    M = MatrixOperator(2, {1: SparseSequence({1: 2**-0.5, 2: 2**-0.5}), 2: SparseSequence({1: 2**-0.5, 2: -(2**-0.5)})})
    p = ExponentSequence.constant(3)
    cert = check_isomodular_structural(M, p)
    assert cert.verdict is Verdict.NOT_ISOMODULAR
    assert modular_mismatch(M, p, cert.witness) > 1e-9


def _generated(regime, seed, count):
    rng = random.Random(seed)
    for i in range(count):
        p = ExponentSequence.constant(rng.choice([1.0, 1.5, 3.0, 7.0])) if i % 2 else random_exponents(rng, regime, 4)
        L = random_isomodular_lamperti(rng, p, 24, 4)
        yield p, L, lamperti_to_matrix(L, 24)


@pytest.mark.parametrize("regime", [Regime.ALL_BELOW_TWO, Regime.ALL_ABOVE_TWO, Regime.MIXED])
def test_generated_operators_certified_and_probed(regime):
    for i, (p, L, M) in enumerate(_generated(regime, 5, 20)):
        assert check_isomodular_structural(M, p).verdict is Verdict.ISOMODULAR
        worst = max(modular_mismatch(M, p, random_sparse(trial_rng(i, "agree", t), M.domain)) for t in range(1000 // 20 + 1))
        assert worst <= 1e-10
        # isomodular implies isometric
        assert check_isometry_randomized(M, p, trials=8, tol=1e-9, max_pairs=16).passed


def test_generator_checker_agreement_1000_probes():
    rng = random.Random(8)
    p = random_exponents(rng, Regime.ALL_ABOVE_TWO, 3)
    M = lamperti_to_matrix(random_isomodular_lamperti(rng, p, 30, 4), 30)
    assert max(modular_mismatch(M, p, random_sparse(trial_rng(0, "k", t), M.domain)) for t in range(1000)) <= 1e-10


@pytest.mark.parametrize("regime", [Regime.ALL_BELOW_TWO, Regime.ALL_ABOVE_TWO])
def test_orthogonality_preserved(regime):
    for i, (p, L, M) in enumerate(_generated(regime, 9, 10)):
        rng = trial_rng(i, "ortho", 0)
        for _ in range(20):
            idx = list(M.domain)
            rng.shuffle(idx)
            cut = rng.randint(0, len(idx))
            a = SparseSequence({n: 1 + rng.random() for n in idx[:cut]})
            b = SparseSequence({n: 1j + rng.random() for n in idx[cut:]})
            assert M.apply(a).support.isdisjoint(M.apply(b).support)


def test_recover_examples():
    sigma = Permutation({1: 2, 2: 3, 3: 1})
    T, h = recover_structure(injection_to_matrix(sigma, 3), CUBE)
    assert T.images == tuple(frozenset({sigma(k)}) for k in (1, 2, 3))
    assert h == SparseSequence({1: 1, 2: 1, 3: 1})

    M = lamperti_to_matrix(EXAMPLE_L, 3)
    T, h = recover_structure(M, CUBE)
    assert (T, h) == (EXAMPLE_L.set_iso, EXAMPLE_L.multiplier)
    assert lamperti_to_matrix(LampertiOperator(h, T), 3) == M

    with pytest.raises(SupportOverlap):
        recover_structure(MatrixOperator(2, {1: basis_vector(1), 2: SparseSequence({1: 1, 2: 1})}), CUBE)
    with pytest.raises(EmptyColumn):
        recover_structure(MatrixOperator(3, {1: basis_vector(1), 3: basis_vector(2)}), CUBE)
    with pytest.raises(RegimeViolation):
        recover_structure(M, ExponentSequence.periodic([1.5, 3]))


@pytest.mark.parametrize("regime", [Regime.ALL_BELOW_TWO, Regime.ALL_ABOVE_TWO])
def test_recovery_round_trip(regime):
    for p, L, M in _generated(regime, 13, 20):
        T, h = recover_structure(M, p)
        assert all(abs(v) <= 1 + 1e-12 for v in h.entries.values())
        assert lamperti_to_matrix(LampertiOperator(h, T), M.dimension) == M


def test_isometry_check_examples():
    p = ONE_THEN_THREE
    assert check_isometry_randomized(injection_to_matrix(Table({1: 1, 2: 2, 3: 3}), 3), p).passed
    alt = ExponentSequence.periodic([1.5, 3])
    assert check_isometry_randomized(injection_to_matrix(Shift(2), 8, n_columns=6), alt).passed

    swap = injection_to_matrix(Permutation({1: 2, 2: 1}), 2)
    r = check_isometry_randomized(swap, p)
    assert not r.passed
    assert r.witness == SparseSequence({1: 0.5, 2: C})
    expected = bisect_root(lambda lam: C / lam + 2**-3 / lam**3 - 1, 0.5, 2.0)
    assert r.norm_x == pytest.approx(1.0, abs=1e-12)
    assert abs(r.norm_image - expected) <= 1e-10
    assert expected == pytest.approx(0.9362904469961172, abs=1e-13)


def test_theta_decision_examples():
    assert theta_isometry_decision(Shift(1), ExponentSequence.constant(2.5), 10).isometric
    assert theta_isometry_decision(Shift(2), ExponentSequence.periodic([1.5, 1.8]), 10).isometric
    d = theta_isometry_decision(Shift(1), ONE_THEN_THREE, 10)
    assert not d.isometric and d.index == 1
    assert d.witness == SparseSequence({1: 0.5, 2: C})
    assert abs(d.witness_norm - 1) <= 1e-9 and d.gap > WITNESS_GAP
    d = theta_isometry_decision(Shift(1), ExponentSequence.periodic([1.5, 1.8]), 10)
    assert not d.isometric and d.gap > WITNESS_GAP


def test_fallback_witness_when_two_term_vector_is_blind():
    # p1 = 3, p2 = 1.5 and p3 chosen so that 2^(-p2/p1) + 2^(-p3/p2) = 1 exactly
    p3 = -1.5 * math.log2(1 - 2**-0.5)
    p = ExponentSequence((3.0, 1.5), Constant(p3))
    naive_b = SparseSequence({1: 2 ** (-1 / 3), 2: 2 ** (-1 / 1.5)})
    blind = luxemburg_norm(apply_injection(Shift(1), naive_b), p).value
    assert abs(blind - 1.0) < 1e-9
    d = theta_isometry_decision(Shift(1), p, 3)
    assert not d.isometric and d.index == 1
    assert d.witness != naive_b
    assert abs(d.witness_norm - 1) <= 1e-9 and d.gap > WITNESS_GAP


def test_shift_composition():
    N = 12
    one = injection_to_matrix(Shift(1), N, n_columns=N - 1)
    for k in range(1, 5):
        m = N - k
        direct = injection_to_matrix(Shift(k), N, n_columns=m)
        composed = MatrixOperator(N, {j: one.column(j) for j in range(1, m + 1)})
        for step in range(1, k):
            composed = MatrixOperator(N, {j: one.column(j) for j in range(1, m + step + 1)}) @ composed
        assert composed == direct


def test_shift_isometric_iff_period_divides():
    p = ExponentSequence.periodic([1.5, 1.8, 3])
    assert [shift_is_isometric(k, p) for k in range(1, 7)] == [False, False, True, False, False, True]
    for k in range(1, 7):
        assert theta_isometry_decision(Shift(k), p, p.decisive_length(), confirm=False).isometric == shift_is_isometric(k, p)
    assert not shift_is_isometric(1, ONE_THEN_THREE)
