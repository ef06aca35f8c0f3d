from __future__ import annotations

import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbent import GBF, classify
from gbent import adic
from gbent.cyclotomic import CycInt
from gbent.errors import PreconditionError
from gbent.gbf import GBENT, wht_naive


@st.composite
def decomposable(draw, ks=(4, 6, 8), max_n: int = 4, min_l: int = 1):
    n = draw(st.integers(1, max_n))
    k = draw(st.sampled_from(ks))
    l = draw(st.sampled_from([d for d in range(min_l, k + 1) if k % d == 0]))
    table = draw(st.lists(st.integers(0, (1 << k) - 1), min_size=1 << n, max_size=1 << n))
    return GBF(n, k, table), l


@given(decomposable())
def test_digits_recombine(fl):
    f, l = fl
    d = adic.decompose(f, l)
    total = sum(c.astype(np.int64) << (j * l) for j, c in enumerate(d.components))
    assert np.array_equal(total, f.table)
    assert d.components.min() >= 0 and d.components.max() < 1 << l


@given(decomposable())
def test_cells_partition_the_cube(fl):
    f, l = fl
    d = adic.decompose(f, l)
    seen = np.zeros(f.size, dtype=int)
    for alpha in d.image:
        cell = d.cell(alpha)
        assert len(cell) > 0
        for x in cell:
            assert d.alpha(int(x)) == tuple(alpha)
        seen[cell] += 1
    assert np.all(seen == 1)
    assert sum(d.cell_sizes().values()) == f.size


@given(decomposable())
@settings(max_examples=150, deadline=None)
def test_walsh_recombination(fl):
    """W_f(u) = sum_alpha C_alpha(u) zeta_{2^k}^{E_alpha}, computed with scalar ring arithmetic."""
    f, l = fl
    d = adic.decompose(f, l)
    if d.r < 2:
        with pytest.raises(PreconditionError):
            adic.partition_coefficients(d)
        return
    ps = adic.partition_coefficients(d)
    step = 1 << (f.k - l)  # zeta_{2^l} = zeta_{2^k}^{2^{k-l}}
    for u in range(f.size):
        acc = CycInt.zero(f.k)
        for alpha in ps.alphas:
            c = ps.C(alpha, u)
            # embed C from Z[zeta_{2^l}] by hand: z_l^i -> z_k^{i step}
            lifted = CycInt.zero(f.k)
            for i, coef in enumerate(c.coeffs):
                if coef:
                    lifted = lifted + CycInt.zeta(f.k, i * step) * coef
            acc = acc + lifted.mul_zeta(d.code(alpha))
        assert acc == wht_naive(f, u)


@given(decomposable(ks=(4, 6), max_n=3))
@settings(max_examples=60, deadline=None)
def test_partition_coefficients_direct(fl):
    f, l = fl
    d = adic.decompose(f, l)
    if d.r < 2:
        return
    ps = adic.partition_coefficients(d)
    top = d.top
    for alpha in ps.alphas:
        cell = d.cell(alpha)
        for u in range(f.size):
            expect = CycInt.zero(l)
            for x in cell:
                sgn = -1 if bin(u & int(x)).count("1") & 1 else 1
                expect = expect + CycInt.zeta(l, int(top[x])) * sgn
            assert ps.C(alpha, u) == expect


@given(decomposable(ks=(4, 6), max_n=4, min_l=2))
@settings(max_examples=300)
def test_two_singleton_cells_block_landscape(fl):
    f, l = fl
    d = adic.decompose(f, l)
    if d.r < 2 or len(d.singleton_cells()) < 2:
        return
    assert not classify(f).is_landscape


def test_binary_digits_escape_sparsity():
    # with l = 1 the coefficients are integers and an odd-n gbent f cannot be 1-sparse
    f = GBF(1, 6, [0, 16])
    assert classify(f).verdict == GBENT
    d = adic.decompose(f, 1)
    assert len(d.singleton_cells()) == 2
    ps = adic.partition_coefficients(d)
    assert ps.profile().tolist() == [2, 2]
    with pytest.raises(PreconditionError):
        adic.sparsity_check(ps, {2})


def test_injective_lower_digits_not_landscape():
    rng = np.random.default_rng(0)
    for _ in range(50):
        perm = rng.permutation(16)
        top = rng.integers(0, 16, 16)
        f = GBF(4, 8, perm + 16 * top)
        assert len(adic.decompose(f, 4).singleton_cells()) == 16
        assert not classify(f).is_landscape


def test_decompose_requires_divisor():
    with pytest.raises(ValueError):
        adic.decompose(GBF.constant(2, 4), 3)


# derived functions -------------------------------------------------------------

def test_derived_beta_definition():
    rng = np.random.default_rng(1)
    f = GBF(3, 6, rng.integers(0, 64, 8))
    d = adic.decompose(f, 2)
    beta = [1, 3]
    g = adic.derived_beta(d, beta)
    c = d.components
    assert np.array_equal(g.table, (c[2] + 1 * c[0] + 3 * c[1]) % 4)
    assert g.k == 2


def test_derived_F_definition():
    rng = np.random.default_rng(2)
    f = GBF(3, 4, rng.integers(0, 16, 8))
    d = adic.decompose(f, 2)
    F = {a: (i * 3) % 2 for i, a in enumerate(d.image)}
    g = adic.derived_F(d, 1, F)
    expect = [(d.top[x] + 2 * F[d.alpha(x)]) % 4 for x in range(8)]
    assert g.table.tolist() == expect


# necessity / sufficiency ------------------------------------------------------------

def _gbent_mm(rng, k: int) -> GBF:
    from gbent.crypto import mm_construct

    g = GBF(2, k, rng.integers(0, 1 << k, 4))
    return mm_construct(2, rng.permutation(4), g, scale=1 << (k - 1)).f


@pytest.mark.parametrize("k,l", [(4, 2), (6, 2), (6, 3), (8, 2), (8, 4)])
def test_necessity_on_gbent(k, l):
    rng = np.random.default_rng(k * 10 + l)
    for i in range(5):
        f = _gbent_mm(rng, k)
        rep = adic.check_necessity(adic.decompose(f, l), samples=20, seed=i)
        assert rep.ok, rep.violations
        assert rep.betas_checked >= 1


def test_necessity_rejects_non_landscape():
    f = GBF(2, 4, [0, 1, 4, 15])
    assert not classify(f).is_landscape
    with pytest.raises(PreconditionError):
        adic.check_necessity(adic.decompose(f, 2))


def test_necessity_detects_mismatch_when_forced():
    # on a non-landscape f the derived magnitudes need not agree; the report lists them
    f = GBF(2, 4, [0, 1, 4, 15])
    rep = adic.check_necessity(adic.decompose(f, 2), require_landscape=False)
    assert not rep.ok
    assert json.dumps(rep.to_dict())


def test_onehot_budget_and_verdicts():
    assert adic.onehot_budget(4, 2) == 9
    rng = np.random.default_rng(3)
    f = _gbent_mm(rng, 4)
    v = adic.verify_sufficiency_onehot(adic.decompose(f, 2))
    assert v.passed
    assert v.checks <= v.budget
    assert v.to_dict()["within_budget"]


def test_onehot_fails_example():
    c0, c1 = np.array([0, 1, 0, 3]), np.array([0, 0, 1, 3])
    v = adic.verify_sufficiency_onehot(adic.decompose(GBF(2, 4, c0 + 4 * c1), 2))
    assert v.verdict == adic.FAIL


def test_onehot_bad_m():
    with pytest.raises(PreconditionError):
        adic.verify_sufficiency_onehot(adic.decompose(GBF.constant(2, 4), 2), m=3)


def test_sparsity_examples():
    rng = np.random.default_rng(4)
    f = _gbent_mm(rng, 6)
    ps = adic.partition_coefficients(adic.decompose(f, 2))
    assert adic.sparsity_check(ps, {1 << f.n}).passed
    c0, c1 = np.array([0, 1, 0, 3]), np.array([0, 0, 1, 3])
    ps = adic.partition_coefficients(adic.decompose(GBF(2, 4, c0 + 4 * c1), 2))
    v = adic.sparsity_check(ps, {4})
    assert v.verdict == adic.FAIL and v.witness["support"] >= 2


@given(decomposable(ks=(4, 6), max_n=4, min_l=2))
@settings(max_examples=200)
def test_sparsity_matches_gbent(fl):
    f, l = fl
    d = adic.decompose(f, l)
    if d.r < 2:
        return
    sparse = adic.sparsity_check(adic.partition_coefficients(d), {1 << f.n}).passed
    assert sparse == (classify(f).verdict == GBENT)


@given(decomposable(ks=(4, 6), max_n=4))
@settings(max_examples=200, deadline=None)
def test_affine_and_basis_pass_only_on_gbent(fl):
    f, l = fl
    d = adic.decompose(f, l)
    if d.l < 2 or d.r < 2:
        return
    gb = classify(f).verdict == GBENT
    for v in (adic.verify_plateaued_common_arg(d, 0), adic.verify_basis_test(d)):
        if v.passed:
            assert gb
        if gb:
            assert v.verdict != adic.FAIL


def test_affine_and_basis_on_constructed_gbent():
    rng = np.random.default_rng(6)
    passes = 0
    for _ in range(10):
        f = _gbent_mm(rng, 4)
        d = adic.decompose(f, 2)
        v = adic.verify_plateaued_common_arg(d, 0)
        b = adic.verify_basis_test(d)
        assert v.verdict in (adic.PASS, adic.INCONCLUSIVE)
        assert b.checks == d.r - 1
        passes += v.passed
    assert passes > 0


def test_example_affine_strategy_not_pass():
    c0, c1 = np.array([0, 1, 0, 3]), np.array([0, 0, 1, 3])
    d = adic.decompose(GBF(2, 4, c0 + 4 * c1), 2)
    v = adic.verify_plateaued_common_arg(d, 0)
    assert v.verdict == adic.INCONCLUSIVE
    b = adic.verify_basis_test(d)
    assert b.verdict == adic.INCONCLUSIVE and b.witness["hypothesis"] == "affine"


def test_odd_n_is_inconclusive():
    rng = np.random.default_rng(7)
    for _ in range(200):
        f = GBF(3, 4, rng.integers(0, 16, 8))
        if classify(f).verdict != GBENT:
            continue
        d = adic.decompose(f, 2)
        assert adic.verify_plateaued_common_arg(d, 0).verdict != adic.PASS
        assert adic.binary_char_oracle(f).verdict == adic.INCONCLUSIVE


# binary oracle ------------------------------------------------------------------------

def test_binary_oracle_exhaustive_k3():
    rng = np.random.default_rng(8)
    for _ in range(100):
        f = GBF(2, 3, rng.integers(0, 8, 4))
        v = adic.binary_char_oracle(f)
        assert v.checks <= adic.binary_budget(3)
        assert v.passed == (classify(f).verdict == GBENT)


def test_binary_oracle_sampled_is_inconclusive_or_fail():
    rng = np.random.default_rng(9)
    f = _gbent_mm(rng, 4)
    v = adic.binary_char_oracle(f, budget=32, seed=1)
    assert v.verdict == adic.INCONCLUSIVE and v.checks == 32
    v = adic.binary_char_oracle(f, exhaustive=True)
    assert v.passed and v.checks == 256


# duality ---------------------------------------------------------------------------------

@pytest.mark.parametrize("n,k", [(2, 4), (4, 4), (4, 6), (2, 8)])
def test_dual_lower_digits_even_n(n, k):
    from gbent.crypto import mm_construct

    rng = np.random.default_rng(n + k)
    for _ in range(5):
        g = GBF(n // 2, k, rng.integers(0, 1 << k, 1 << (n // 2)))
        f = mm_construct(n // 2, rng.permutation(1 << (n // 2)), g, scale=1 << (k - 1)).f
        stars = adic.dual_lower_digits(adic.decompose(f, 2))
        assert len(stars) == f.size


def test_dual_lower_digits_odd_n():
    # direct sums 2^{k-1} x_1 x_2 + h(x_3) with h a Z_{2^k} gbent on one bit
    k = 4
    hs = [t for t in itertools.product(range(16), repeat=2) if classify(GBF(1, k, t)).verdict == GBENT]
    assert hs
    idx = np.arange(8)
    for h in hs[:10]:
        t = ((idx & 1) * (idx >> 1 & 1) * 8 + np.array(h)[idx >> 2]) % 16
        f = GBF(3, k, t)
        assert classify(f).verdict == GBENT
        assert len(adic.dual_lower_digits(adic.decompose(f, 2))) == 8


def test_export_json():
    f = GBF(2, 4, [0, 1, 4, 15])
    ps = adic.partition_coefficients(adic.decompose(f, 2))
    doc = json.loads(adic.export_json(ps))
    assert set(doc) >= {"l", "r", "components", "coefficients"}
