"""Acceptance gate.  Every criterion prints one PASS/FAIL line; the same lines are
repeated in the pytest terminal summary.  Run standalone with
``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import itertools
import json
import time
from functools import lru_cache

import numpy as np
import pytest

from acceptance_log import record
from gbent import GBF, classify, cli, wht_naive
from gbent import adic, charsum, crypto
from gbent.charsum import FinAbGroup, WeightedSupport
from gbent.cyclotomic import CycInt
from gbent.errors import HypothesisNotMet, TheoremViolation
from gbent.gbf import GBENT, wht_array

pytestmark = pytest.mark.acceptance


# shared sweeps ----------------------------------------------------------------

@lru_cache(maxsize=None)
def all_n2(k: int) -> np.ndarray:
    return np.array(list(itertools.product(range(1 << k), repeat=4)), dtype=np.int64)


@lru_cache(maxsize=None)
def n2k4_reports() -> list:
    return [classify(GBF(2, 4, t)) for t in all_n2(4)]


def _levels_sorted(rep) -> list:
    return sorted(tuple(lv) for lv in rep.levels)


# 1 ----------------------------------------------------------------------------

# coordinates (x1, x2) sit at index x1 + 2 x2
EX41_C0 = [0, 1, 0, 3]
EX41_C1 = [0, 0, 1, 3]
EX41_MAGS = {(0, 0): 3.018, (0, 1): 1.027, (1, 0): 1.311, (1, 1): 2.029}


def criterion_1() -> tuple[bool, str]:
    t0 = time.perf_counter()
    c0, c1 = np.array(EX41_C0), np.array(EX41_C1)
    g_ok = []
    for beta in range(4):
        rep = classify(GBF(2, 2, (c1 + beta * c0) % 4))
        g_ok.append(rep.verdict == GBENT and all(q == 4 for q in rep.squared_int))
    f = GBF(2, 4, c0 + 4 * c1)
    rep = classify(f)
    mags = rep.magnitudes
    mag_ok = all(abs(mags[x1 + 2 * x2] - v) <= 0.002 for (x1, x2), v in EX41_MAGS.items())
    dt = time.perf_counter() - t0
    ok = all(g_ok) and rep.verdict != GBENT and mag_ok and dt < 1.0
    return ok, (
        f"g_beta gbent |W|^2=4: {g_ok}; f verdict {rep.label()}; "
        f"|W_f| = {np.round(mags, 4).tolist()}; {dt * 1000:.1f} ms"
    )


def test_criterion_1_example_reproduction():
    ok, detail = criterion_1()
    record("1", ok, detail)
    assert ok, detail


# 2 ----------------------------------------------------------------------------

def criterion_2() -> tuple[bool, str]:
    t0 = time.perf_counter()
    rep = classify(crypto.preset("PRESENT").as_gbf())
    dt = time.perf_counter() - t0
    clusters = len(rep.distinct_magnitudes(1e-6))
    w0_zero = rep.squared[0].is_zero()
    w1 = rep.magnitudes[1]
    sq5 = rep.squared_int[5]
    where8 = [u for u, q in enumerate(rep.squared_int) if q == 8]
    checks = {
        "15 clusters": clusters == 15,
        "|W(0)|=0": w0_zero,
        "|W(1)|=1.104": bool(abs(w1 - 1.104) <= 0.002),
        "|W(5)|^2=8": sq5 == 8,
        "not-landscape": rep.verdict == "not-landscape",
        "< 1 s": dt < 1.0,
    }
    detail = (
        f"{checks}; |W(5)| = {rep.magnitudes[5]:.4f} (rational square: {sq5}); "
        f"|W(u)|^2 = 8 exactly at u = {where8}"
    )
    return all(checks.values()), detail


def test_criterion_2_present_audit():
    ok, detail = criterion_2()
    record("2", ok, detail)
    assert ok, detail


# 3 ----------------------------------------------------------------------------

def criterion_3() -> tuple[bool, str]:
    t0 = time.perf_counter()
    mismatches = []
    gbent = 0
    for t in all_n2(2):
        f = GBF(2, 2, t)
        v = adic.binary_char_oracle(f)
        c = classify(f).verdict == GBENT
        gbent += c
        if v.verdict == adic.INCONCLUSIVE or v.passed != c:
            mismatches.append(t.tolist())
    dt = time.perf_counter() - t0
    ok = not mismatches and dt < 10.0
    return ok, f"256 functions, {gbent} gbent, {len(mismatches)} mismatches, {dt:.2f} s"


def test_criterion_3_binary_oracle_cross_validation():
    ok, detail = criterion_3()
    record("3", ok, detail)
    assert ok, detail


# 4 ----------------------------------------------------------------------------

def _n4_landscape_instances(count_sum: int = 40, count_mm: int = 20, seed: int = 4) -> list[GBF]:
    rng = np.random.default_rng(seed)
    land = [t for t, r in zip(all_n2(4), n2k4_reports()) if r.is_landscape]
    out = []
    idx = np.arange(16)
    for _ in range(count_sum):
        a, b = (land[i] for i in rng.integers(0, len(land), 2))
        out.append(GBF(4, 4, (a[idx & 3] + b[idx >> 2]) % 16))
    for _ in range(count_mm):
        g = GBF(2, 4, rng.integers(0, 16, 4))
        out.append(crypto.mm_construct(2, rng.permutation(4), g, scale=8).f)
    return out


def criterion_4() -> tuple[bool, str]:
    land = [t for t, r in zip(all_n2(4), n2k4_reports()) if r.is_landscape]
    bad = short = 0
    checked = []
    inst = _n4_landscape_instances()
    not_land = sum(not classify(f).is_landscape for f in inst)
    bad4 = 0
    for i, f in enumerate([GBF(2, 4, t) for t in land] + inst):
        d = adic.decompose(f, 2)
        rep = adic.check_necessity(d, samples=20, seed=i, require_landscape=False)
        if i < len(land):
            bad += len(rep.violations)
        else:
            bad4 += len(rep.violations)
        # a family with fewer than 20 distinct F is enumerated in full
        family = sum((1 << m) ** len(d.image) for m in range(2, d.l + 1))
        short += rep.F_checked < min(20, family)
        checked.append(rep.F_checked)
    ok = bad == 0 and bad4 == 0 and not_land == 0 and len(inst) >= 50 and short == 0
    return ok, (
        f"n=2 landscape {len(land)}: {bad} violations; n=4 instances {len(inst)} "
        f"({not_land} not landscape): {bad4} violations; F checked per instance "
        f"{min(checked)}..{max(checked)}, {sum(c < 20 for c in checked)} instances with a full family below 20"
    )


def test_criterion_4_necessity():
    ok, detail = criterion_4()
    record("4", ok, detail)
    assert ok, detail


# 5 ----------------------------------------------------------------------------

def criterion_5() -> tuple[bool, str]:
    passes = false_cert = 0
    for t, rep in zip(all_n2(4), n2k4_reports()):
        d = adic.decompose(GBF(2, 4, t), 2)
        v = adic.verify_sufficiency_onehot(d, 2)
        if not v.passed:
            continue
        passes += 1
        top = classify(d.top_gbf())
        if not rep.is_landscape or _levels_sorted(rep) != _levels_sorted(top):
            false_cert += 1
    ok = false_cert == 0
    return ok, f"{passes} PASS verdicts over 65536 functions, {false_cert} false certifications"


def test_criterion_5_onehot_soundness():
    ok, detail = criterion_5()
    record("5", ok, detail)
    assert ok, detail


# 6 ----------------------------------------------------------------------------

def criterion_6() -> tuple[bool, str]:
    disc = gb = 0
    for t, rep in zip(all_n2(4), n2k4_reports()):
        ps = adic.partition_coefficients(adic.decompose(GBF(2, 4, t), 2))
        sparse = adic.sparsity_check(ps, {4}).passed
        is_gbent = rep.verdict == GBENT
        gb += is_gbent
        disc += sparse != is_gbent
    return disc == 0, f"{gb} gbent of 65536, {disc} discrepancies"


def test_criterion_6_sparsity_biconditional():
    ok, detail = criterion_6()
    record("6", ok, detail)
    assert ok, detail


# 7 ----------------------------------------------------------------------------

SEVEN_GROUPS = ([8], [2, 4], [4, 4])


def _two_level_instances(count: int = 500, seed: int = 7):
    """Seeded instances mixing coset indicators, two-coset unions and random supports.

    Weights carry a common root-of-unity phase so the common argument is not
    always the real axis.
    """
    rng = np.random.default_rng(seed)
    for i in range(count):
        g = FinAbGroup(SEVEN_GROUPS[i % 3])
        subs = g.subgroups()
        H = sorted(subs[int(rng.integers(len(subs)))])
        kind = i % 5
        elems = g.elements()
        a = elems[int(rng.integers(len(elems)))]
        if kind in (0, 1):
            pts = [g.add(a, h) for h in H]
            ws = [int(rng.integers(1, 4))] * len(pts)
        elif kind in (2, 3):
            b = elems[int(rng.integers(len(elems)))]
            A = {g.add(a, h) for h in H}
            B = {g.add(b, h) for h in H} - A
            c1, c2 = (int(v) for v in rng.integers(1, 3, 2))
            pts = sorted(A) + sorted(B)
            ws = [c1] * len(A) + [c2] * len(B)
        else:
            size = int(rng.integers(1, 5))
            pick = rng.choice(len(elems), size=size, replace=False)
            pts = [elems[j] for j in pick]
            ws = [int(v) for v in rng.integers(1, 4, size)]
        phase = int(rng.integers(0, 1 << g.exponent_bits))
        K = g.exponent_bits
        yield WeightedSupport(g, pts, [CycInt.zeta(K, phase) * w for w in ws])


def _oracle_structure(ws: WeightedSupport):
    """H = Stab(D + D) and the image of supp(mu) in G/H, by brute force."""
    g = ws.group
    S = set(ws.points)
    D = {g.sub(s, t) for s in S for t in S}
    DD = {g.add(x, y) for x in D for y in D}
    H = [h for h in g.elements() if {g.add(x, h) for x in DD} == DD]
    cosets = {frozenset(g.add(s, h) for h in H) for s in S}
    return H, cosets


def _coset_order(g, H, d) -> int:
    Hs = set(H)
    x, k = d, 1
    while x not in Hs:
        x, k = g.add(x, d), k + 1
    return k


def criterion_7() -> tuple[bool, str]:
    certified = skipped = violations = 0
    for ws in _two_level_instances():
        try:
            cert = charsum.certify_overconstrained(ws)
        except HypothesisNotMet:
            skipped += 1
            continue
        except TheoremViolation:
            violations += 1
            continue
        certified += 1
        H, cosets = _oracle_structure(ws)
        if set(cert.H) != set(H) or len(cosets) != len(cert.S_bar) or len(cosets) > 2:
            violations += 1
            continue
        if len(cosets) == 2:
            s, t = (next(iter(c)) for c in cosets)
            if _coset_order(ws.group, H, ws.group.sub(s, t)) > 2:
                violations += 1
    ok = violations == 0 and certified > 0
    return ok, f"500 instances: {certified} certified, {skipped} hypothesis not met, {violations} violations"


def test_criterion_7_overconstrained_certificates():
    ok, detail = criterion_7()
    record("7", ok, detail)
    assert ok, detail


# 8 ----------------------------------------------------------------------------

def criterion_8() -> tuple[bool, str]:
    checked = bad = 0
    for moduli in ([8], [2, 2, 2]):
        g = FinAbGroup(moduli)
        for H in g.subgroups():
            ws = WeightedSupport(g, sorted(H), [1] * len(H))
            sq = [q.as_rational_integer() for q in charsum.fourier(ws).squared()]
            expect_nonzero = g.order // len(H)
            levels_ok = set(sq) <= {0, len(H) ** 2} and sq.count(len(H) ** 2) == expect_nonzero
            nr = charsum.numerology_check(ws)
            num_ok = nr.N * nr.A2 == g.order * len(H)
            checked += 1
            bad += not (levels_ok and num_ok)
    return bad == 0, f"{checked} subgroups of Z8 and Z2^3, {bad} failures"


def test_criterion_8_subgroup_indicator():
    ok, detail = criterion_8()
    record("8", ok, detail)
    assert ok, detail


# 9 ----------------------------------------------------------------------------

NINE_GROUPS = (
    [2], [3], [5], [7], [8], [11], [12], [13], [16], [17], [19], [23], [24],
    [2, 2], [2, 4], [3, 3], [2, 6], [4, 4], [2, 8], [3, 6], [2, 10], [2, 12],
    [2, 2, 2], [2, 2, 4], [2, 2, 6], [2, 3, 4],
)


def criterion_9(count: int = 1000, seed: int = 9) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    bad = equality = 0
    for i in range(count):
        g = FinAbGroup(NINE_GROUPS[i % len(NINE_GROUPS)])
        elems = g.elements()
        if i % 4 == 0:
            subs = g.subgroups()
            H = sorted(subs[int(rng.integers(len(subs)))])
            a = elems[int(rng.integers(len(elems)))]
            pts = [g.add(a, h) for h in H]
            y = elems[int(rng.integers(len(elems)))]
            ws_ = [complex(g.char_value(y, p)) * 1.5 for p in pts]
        else:
            size = int(rng.integers(1, g.order + 1))
            pick = rng.choice(len(elems), size=size, replace=False)
            pts = [elems[j] for j in pick]
            ws_ = [complex(*v) for v in rng.normal(size=(size, 2))]
        try:
            rep = charsum.uncertainty_check(WeightedSupport(g, pts, ws_))
            equality += rep.equality
        except TheoremViolation:
            bad += 1
    return bad == 0, f"{count} functions on {len(NINE_GROUPS)} groups, {bad} violations, {equality} equality cases"


def test_criterion_9_uncertainty():
    ok, detail = criterion_9()
    record("9", ok, detail)
    assert ok, detail


# 10 ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def ten_tables() -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(10)
    return all_n2(4), rng.integers(0, 16, size=(200, 16))


def _dirs(n: int):
    M = 1 << n
    for a in range(M):
        yield [a]
    for a in range(M):
        for b in range(M):
            yield [a, b]


def _derivative_sweep(fn) -> int:
    """Number of functions where ``fn`` fails for some direction set."""
    bad = 0
    for tables, n in zip(ten_tables(), (2, 4)):
        ok = np.ones(len(tables), dtype=bool)
        for dirs in _dirs(n):
            ok &= fn(tables, 4, 2, dirs)
        bad += int((~ok).sum())
    return bad


def criterion_10a() -> tuple[bool, str]:
    bad = _derivative_sweep(crypto.derivative_digits_batch)
    ident = _derivative_sweep(crypto.derivative_identity_batch)
    return bad == 0, (
        f"digit-wise commutation fails on {bad} of 65736 functions; "
        f"the unreduced integer identity fails on {ident}"
    )


def criterion_10b() -> tuple[bool, str]:
    bad = implied = 0
    quad_total = 0
    for tables in ten_tables():
        q = crypto.second_derivatives_constant_batch(tables, 4)
        c = crypto.components_quadratic_batch(tables, 4, 2)
        quad_total += int(q.sum())
        bad += int((q != c).sum())
        implied += int((q & ~c).sum())
    return bad == 0, (
        f"{bad} discrepancies ({implied} quadratic f with a non-quadratic digit, "
        f"{bad - implied} non-quadratic f with quadratic digits); {quad_total} quadratic f"
    )


def criterion_10c() -> tuple[bool, str]:
    bad = c0_bad = 0
    for tables in ten_tables():
        bad += int((~crypto.differential_bound_batch(tables, 4, 2)).sum())
    for t in ten_tables()[1]:
        c0_bad += not crypto.c0_differential_bound_holds(GBF(4, 4, t), 2)
    return bad == 0, f"min-over-digits bound fails on {bad} functions; lowest-digit bound fails on {c0_bad} of 200"


def criterion_10d() -> tuple[bool, str]:
    bad = 0
    for tables in ten_tables():
        _, direct, via = crypto.gbeta_differentials_batch(tables, 4, 2)
        bad += int(np.any(direct != via, axis=(1, 2, 3)).sum())
    rng = np.random.default_rng(11)
    scalar = 0
    for t in ten_tables()[1][:20]:
        d = adic.decompose(GBF(4, 4, t), 2)
        delta = crypto.component_uniformity(d)
        for _ in range(10):
            beta = [int(rng.integers(0, 4))]
            a, b = int(rng.integers(1, 16)), int(rng.integers(0, 4))
            try:
                crypto.diff_gbeta_formula(d, beta, a, b, component_delta=delta)
            except TheoremViolation:
                scalar += 1
    return bad + scalar == 0, f"two-path counts differ on {bad} functions; scalar path failures {scalar}"


@pytest.mark.parametrize(
    "sub, fn",
    [("10a", criterion_10a), ("10b", criterion_10b), ("10c", criterion_10c), ("10d", criterion_10d)],
    ids=["digitwise-derivatives", "quadratic-biconditional", "differential-bound", "two-path-differential"],
)
def test_criterion_10_derivative_sweeps(sub, fn):
    ok, detail = fn()
    record(sub, ok, detail)
    assert ok, detail


# 11 ---------------------------------------------------------------------------

def _cli_verdict(tmp_path, f: GBF, strategy: str, *extra: str) -> dict:
    src = tmp_path / "f.json"
    out = tmp_path / "out.json"
    f.save(src)
    code = cli.main(["verify", "--input", str(src), "--strategy", strategy, "--out", str(out), *extra])
    assert code == 0
    return json.loads(out.read_text())["verdict"]


def criterion_11(tmp_path) -> tuple[bool, str]:
    rng = np.random.default_rng(12)
    over = []
    runs = 0
    for t in all_n2(2)[::7]:
        v = _cli_verdict(tmp_path, GBF(2, 2, t), "binary")
        runs += 1
        if v["checks"] > 1 << (1 << 1):
            over.append(("binary", t.tolist(), v["checks"]))
    for n, k, l in [(2, 4, 2), (4, 4, 2), (4, 8, 2), (4, 8, 4), (3, 6, 2), (4, 6, 3)]:
        for _ in range(6):
            f = GBF(n, k, rng.integers(0, 1 << k, 1 << n))
            v = _cli_verdict(tmp_path, f, "onehot", "--l", str(l))
            runs += 1
            if v["checks"] > (1 << (k - l + 1)) + 1:
                over.append(("onehot", n, k, l, v["checks"]))
            v = _cli_verdict(tmp_path, f, "basis", "--l", str(l))
            runs += 1
            if v["checks"] != k // l - 1:
                over.append(("basis", n, k, l, v["checks"]))
    return not over, f"{runs} verify runs, {len(over)} over budget {over[:3]}"


def test_criterion_11_budgets(tmp_path):
    ok, detail = criterion_11(tmp_path)
    record("11", ok, detail)
    assert ok, detail


# 12 ---------------------------------------------------------------------------

def criterion_12() -> tuple[bool, str]:
    rng = np.random.default_rng(13)
    f10 = GBF(10, 8, rng.integers(0, 256, 1 << 10))
    t0 = time.perf_counter()
    rep = classify(f10)
    t_full = time.perf_counter() - t0
    f8 = GBF(8, 8, rng.integers(0, 256, 1 << 8))
    t0 = time.perf_counter()
    fast = wht_array(f8)
    t_fast = time.perf_counter() - t0
    t0 = time.perf_counter()
    naive = [wht_naive(f8, u) for u in range(f8.size)]
    t_naive = time.perf_counter() - t0
    agree = all(list(w.coeffs) == row.tolist() for w, row in zip(naive, fast))
    speedup = t_naive / max(t_fast, 1e-9)
    ok = t_full < 30.0 and speedup >= 10.0 and agree and len(rep.walsh) == 1 << 10
    return ok, (
        f"n=10 k=8 classify {t_full:.3f} s; n=8 butterfly {t_fast * 1000:.2f} ms vs naive "
        f"{t_naive * 1000:.0f} ms ({speedup:.0f}x), outputs agree: {agree}"
    )


def test_criterion_12_performance():
    ok, detail = criterion_12()
    record("12", ok, detail)
    assert ok, detail


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    runs = [
        ("1", criterion_1), ("2", criterion_2), ("3", criterion_3), ("4", criterion_4),
        ("5", criterion_5), ("6", criterion_6), ("7", criterion_7), ("8", criterion_8),
        ("9", criterion_9), ("10a", criterion_10a), ("10b", criterion_10b),
        ("10c", criterion_10c), ("10d", criterion_10d),
    ]
    for cid, fn in runs:
        record(cid, *fn())
    with tempfile.TemporaryDirectory() as tmp:
        record("11", *criterion_11(Path(tmp)))
    record("12", *criterion_12())
