"""2^l-adic decomposition f = sum_j c_j 2^{jl} and the verification strategies
built on it.

The lower digits (c_0..c_{r-2}) split the cube into cells P_alpha.  On each
cell the top digit c_{r-1} contributes

    C_alpha(u) = sum_{x in P_alpha} zeta_{2^l}^{c_{r-1}(x)} (-1)^{<u,x>},

and W_f(u) = sum_alpha C_alpha(u) zeta_{2^k}^{E_alpha} with
E_alpha = sum_j alpha_j 2^{jl} < 2^{k-l}.  Because the powers zeta_{2^k}^e,
e < 2^{k-l}, times the power basis of Z[zeta_{2^l}] are exactly the power
basis of Z[zeta_{2^k}], the recombination is a coefficient scatter.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import charsum
from .cyclotomic import CycInt, abs_sq_array, degree, embed_array
from .errors import PreconditionError, TheoremViolation
from .gbf import GBF, butterfly, classify, dual_exponent, wht_array, wht_batch

PASS = "PASS"
FAIL = "FAIL"
INCONCLUSIVE = "INCONCLUSIVE"

ENUMERATION_BITS = 8  # full beta / F enumeration when l(r-1) <= this
F_ENUMERATION_CAP = 4096


@dataclass
class Verdict:
    strategy: str
    verdict: str
    checks: int
    budget: Optional[int] = None
    witness: Optional[dict] = None
    reason: str = ""
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "verdict": self.verdict,
            "checks": self.checks,
            "budget": self.budget,
            "within_budget": self.budget is None or self.checks <= self.budget,
            "witness": self.witness,
            "reason": self.reason,
            "details": self.details,
        }


# decomposition --------------------------------------------------------------

@dataclass
class AdicDecomposition:
    f: GBF
    l: int
    r: int
    components: np.ndarray  # shape (r, 2^n), values in [0, 2^l)
    codes: np.ndarray  # E_alpha(x) = f(x) mod 2^{k-l}
    image: list  # attained alpha tuples, sorted by code

    @property
    def n(self) -> int:
        return self.f.n

    @property
    def k(self) -> int:
        return self.f.k

    @property
    def top(self) -> np.ndarray:
        return self.components[-1]

    def top_gbf(self) -> GBF:
        return GBF(self.n, self.l, self.top)

    def alpha(self, x: int) -> tuple:
        return tuple(int(c) for c in self.components[:-1, x])

    def code(self, alpha: Sequence[int]) -> int:
        return sum(int(a) << (j * self.l) for j, a in enumerate(alpha))

    def alpha_of_code(self, code: int) -> tuple:
        mask = (1 << self.l) - 1
        return tuple((code >> (j * self.l)) & mask for j in range(self.r - 1))

    def cell(self, alpha: Sequence[int]) -> np.ndarray:
        return np.flatnonzero(self.codes == self.code(alpha))

    def cell_sizes(self) -> dict:
        return {a: int(np.count_nonzero(self.codes == self.code(a))) for a in self.image}

    def singleton_cells(self) -> list:
        return [a for a, s in self.cell_sizes().items() if s == 1]

    def lower_gbfs(self) -> list[GBF]:
        return [GBF(self.n, self.l, c) for c in self.components[:-1]]

    def to_json(self) -> dict:
        return {"l": self.l, "r": self.r, "components": self.components.tolist()}


def decompose(f: GBF, l: int) -> AdicDecomposition:
    """Split f into r = k/l base-2^l digits."""
    if l < 1 or f.k % l:
        raise ValueError(f"l={l} must be a positive divisor of k={f.k}")
    r = f.k // l
    mask = (1 << l) - 1
    comps = np.stack([(f.table >> (j * l)) & mask for j in range(r)])
    recon = sum(comps[j] << (j * l) for j in range(r)) % (1 << f.k)
    if not np.array_equal(recon, f.table):
        raise TheoremViolation("digit recombination failed")
    codes = f.table & ((1 << (f.k - l)) - 1)
    d = AdicDecomposition(f, l, r, comps, codes, [])
    d.image = [d.alpha_of_code(int(c)) for c in np.unique(codes)]
    return d


# partition coefficients -----------------------------------------------------

@dataclass
class PartitionSpectrum:
    decomposition: AdicDecomposition
    alphas: list  # same order as axis 0 of coeffs
    coeffs: np.ndarray  # (|image|, 2^n, 2^{l-1}) coefficients over Z[zeta_{2^l}]

    def __post_init__(self):
        self.nonzero = np.any(self.coeffs != 0, axis=-1)

    @property
    def size(self) -> int:
        return self.coeffs.shape[1]

    def C(self, alpha: Sequence[int], u: int) -> CycInt:
        alpha = tuple(alpha)
        if alpha not in self.alphas:
            return CycInt.zero(self.decomposition.l)
        return CycInt(self.decomposition.l, self.coeffs[self.alphas.index(alpha), u].tolist())

    def support(self, u: int) -> list:
        return [a for a, nz in zip(self.alphas, self.nonzero[:, u]) if nz]

    def profile(self) -> np.ndarray:
        """|S(u)| for each u."""
        return self.nonzero.sum(axis=0)

    def alpha_star(self) -> list:
        return [self.support(u)[0] if c == 1 else None for u, c in enumerate(self.profile())]

    def nonzero_values(self, u: int) -> list[CycInt]:
        return [self.C(a, u) for a in self.support(u)]

    def to_json(self) -> dict:
        d = self.decomposition
        coeffs = {}
        for u in range(self.size):
            coeffs[str(u)] = {
                ",".join(map(str, a)): self.coeffs[i, u].tolist() for i, a in enumerate(self.alphas)
            }
        return {"l": d.l, "r": d.r, "components": d.components.tolist(), "coefficients": coeffs}


def partition_coefficients(d: AdicDecomposition) -> PartitionSpectrum:
    """C_alpha(u) for every attained alpha, checked against W_f by recombination."""
    if d.r < 2:
        raise PreconditionError("decomposition has a single component; no partition")
    from .cyclotomic import lift_exponents

    lifted = lift_exponents(d.top, d.l)  # (2^n, Nl)
    codes = np.array([d.code(a) for a in d.image])
    masks = d.codes[None, :] == codes[:, None]  # (|image|, 2^n)
    arr = lifted[None, :, :] * masks[:, :, None]
    butterfly(arr)
    ps = PartitionSpectrum(d, list(d.image), arr)
    _check_recombination(ps)
    return ps


def _check_recombination(ps: PartitionSpectrum) -> None:
    d = ps.decomposition
    Nk = degree(d.k)
    total = np.zeros((ps.size, Nk), dtype=ps.coeffs.dtype)
    step = 1 << (d.k - d.l)
    for i, a in enumerate(ps.alphas):
        e = d.code(a)
        total[:, e::step] += ps.coeffs[i]
    if not np.array_equal(total, wht_array(d.f)):
        raise TheoremViolation("partition coefficients do not recombine to W_f")


# derived functions ----------------------------------------------------------

def derived_beta(d: AdicDecomposition, beta: Sequence[int]) -> GBF:
    """c_{r-1} + sum_j beta_j c_j over Z_{2^l}."""
    return GBF(d.n, d.l, _beta_tables(d, np.array([beta]))[0])


def _beta_tables(d: AdicDecomposition, betas: np.ndarray) -> np.ndarray:
    betas = np.asarray(betas, dtype=np.int64).reshape(len(betas), -1)
    if d.r < 2:
        raise PreconditionError("need r >= 2")
    if betas.shape[1] != d.r - 1:
        raise ValueError(f"beta must have length r-1 = {d.r - 1}")
    return (d.top[None, :] + betas @ d.components[:-1]) % (1 << d.l)


def derived_F(d: AdicDecomposition, m: int, F: dict) -> GBF:
    """c_{r-1} + 2^{l-m} F(c_0..c_{r-2}) over Z_{2^l}; F is a lookup on alpha tuples."""
    return GBF(d.n, d.l, _F_tables(d, m, [F])[0])


def _F_tables(d: AdicDecomposition, m: int, Fs: Sequence[dict]) -> np.ndarray:
    if not 1 <= m <= d.l:
        raise ValueError(f"m={m} must lie in [1, l={d.l}]")
    if d.r < 2:
        raise PreconditionError("need r >= 2")
    idx = {d.code(a): i for i, a in enumerate(d.image)}
    cell_of_x = np.array([idx[int(c)] for c in d.codes])
    vals = np.zeros((len(Fs), len(d.image)), dtype=np.int64)
    for row, F in enumerate(Fs):
        for a, v in F.items():
            a = tuple(a)
            if d.code(a) in idx:
                vals[row, idx[d.code(a)]] = int(v) % (1 << m)
    return (d.top[None, :] + (vals[:, cell_of_x] << (d.l - m))) % (1 << d.l)


def _squared_batch(tables: np.ndarray, k: int) -> np.ndarray:
    W = wht_batch(tables, k)
    return abs_sq_array(W, bound=tables.shape[-1])


def _all_betas(d: AdicDecomposition) -> np.ndarray:
    return np.array(list(itertools.product(range(1 << d.l), repeat=d.r - 1)), dtype=np.int64)


# necessity ------------------------------------------------------------------

@dataclass
class NecessityReport:
    betas_checked: int
    F_checked: int
    enumerated_beta: bool
    enumerated_F: bool
    seed: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "betas_checked": self.betas_checked,
            "F_checked": self.F_checked,
            "enumerated_beta": self.enumerated_beta,
            "enumerated_F": self.enumerated_F,
            "seed": self.seed,
            "violations": self.violations,
        }


def _mismatch_rows(sq_small: np.ndarray, l: int, k: int, target: np.ndarray) -> list:
    """Indices (row, u) where the embedded squared magnitude differs from target."""
    emb = embed_array(sq_small, l, k)
    bad = np.any(emb != target[None], axis=-1)
    return [(int(i), int(u)) for i, u in zip(*np.nonzero(bad))]


def _random_Fs(d: AdicDecomposition, count: int, rng: np.random.Generator, m: Optional[int] = None):
    out = []
    for _ in range(count):
        mm = int(rng.integers(2, d.l + 1)) if m is None else m
        vals = rng.integers(0, 1 << mm, size=len(d.image))
        out.append((mm, {a: int(v) for a, v in zip(d.image, vals)}))
    return out


def _enumerate_Fs(d: AdicDecomposition, m: int):
    for vals in itertools.product(range(1 << m), repeat=len(d.image)):
        yield m, dict(zip(d.image, vals))


def check_necessity(
    d: AdicDecomposition,
    samples: int = 20,
    seed: int = 0,
    require_landscape: bool = True,
    max_violations: int = 20,
) -> NecessityReport:
    """Every f_beta and f_F must share f's per-u squared magnitudes.

    Betas are enumerated when l(r-1) <= 8, otherwise ``samples`` are drawn.
    F maps are enumerated for every m in [2, l] when that family has at most
    4096 members, otherwise ``samples`` random F with random m are drawn.
    """
    if d.l < 2 or d.r < 2:
        raise PreconditionError("necessity needs l >= 2 and r >= 2")
    if require_landscape and not classify(d.f).is_landscape:
        raise PreconditionError("f is not landscape; the necessity statement does not apply")
    rng = np.random.default_rng(seed)
    target = abs_sq_array(wht_array(d.f), bound=d.f.size)

    enum_beta = d.l * (d.r - 1) <= ENUMERATION_BITS
    betas = _all_betas(d) if enum_beta else rng.integers(0, 1 << d.l, size=(samples, d.r - 1))
    sq = _squared_batch(_beta_tables(d, betas), d.l)
    violations = []
    for i, u in _mismatch_rows(sq, d.l, d.k, target)[:max_violations]:
        violations.append({"kind": "beta", "beta": betas[i].tolist(), "u": u})

    family = sum((1 << m) ** len(d.image) for m in range(2, d.l + 1))
    enum_F = family <= F_ENUMERATION_CAP
    if enum_F:
        Fs = [p for m in range(2, d.l + 1) for p in _enumerate_Fs(d, m)]
    else:
        Fs = _random_Fs(d, samples, rng)
    F_checked = 0
    for m in sorted(set(p[0] for p in Fs)):
        group = [F for mm, F in Fs if mm == m]
        sq = _squared_batch(_F_tables(d, m, group), d.l)
        F_checked += len(group)
        for i, u in _mismatch_rows(sq, d.l, d.k, target)[: max_violations - len(violations)]:
            violations.append({"kind": "F", "m": m, "F": _F_to_json(group[i]), "u": u})
    return NecessityReport(len(betas), F_checked, enum_beta, enum_F, seed, violations)


def _F_to_json(F: dict) -> dict:
    return {",".join(map(str, a)): int(v) for a, v in F.items()}


# sufficiency via one-hot probes -------------------------------------------------

def onehot_budget(k: int, l: int) -> int:
    return (1 << (k - l + 1)) + 1


def verify_sufficiency_onehot(d: AdicDecomposition, m: Optional[int] = None) -> Verdict:
    """Certify f landscape from c_{r-1} and the probes F = a 1_{alpha0}, a in {1, 2^{m-1}}."""
    m = d.l if m is None else m
    if d.l < 2 or d.r < 2 or not 2 <= m <= d.l:
        raise PreconditionError(f"one-hot probes need l >= 2, r >= 2 and 2 <= m <= l (got l={d.l}, r={d.r}, m={m})")
    budget = onehot_budget(d.k, d.l)
    top = d.top_gbf()
    rep = classify(top)
    if not rep.is_landscape:
        return Verdict("onehot", FAIL, 1, budget, {"function": "top component"}, "top component is not landscape")
    target = abs_sq_array(wht_array(top), bound=top.size)
    amps = sorted({1, 1 << (m - 1)})
    probes = [(a0, a) for a0 in d.image for a in (1, 1 << (m - 1))]
    tables = _F_tables(d, m, [{a0: a} for a0, a in probes])
    sq = _squared_batch(tables, d.l)
    checks = 1 + len(probes)
    bad = np.any(sq != target[None], axis=-1)
    if bad.any():
        i, u = map(int, np.argwhere(bad)[0])
        a0, a = probes[i]
        return Verdict(
            "onehot", FAIL, checks, budget,
            {"alpha0": list(a0), "a": a, "u": u},
            "probe magnitudes differ from the top component",
        )
    levels = sorted([list(lv) for lv in rep.levels])
    return Verdict(
        "onehot", PASS, checks, budget, None,
        "all probes share the top component's magnitudes",
        {"levels": levels, "m": m, "amplitudes": amps, "image_size": len(d.image)},
    )


# sparsity -------------------------------------------------------------------

def _as_squares(levels: Iterable) -> set:
    out = set()
    for lv in levels:
        if isinstance(lv, (tuple, list)):
            m, v = lv
            out.add((1 << m) * v * v)
        else:
            out.add(int(lv))
    return out


def sparsity_check(ps: PartitionSpectrum, levels: Iterable) -> Verdict:
    """Per u: no nonzero C_alpha(u), or exactly one with |C|^2 in the level set.

    With levels {2^n} (the gbent case) an all-zero u is also rejected.
    Needs l >= 2: with l = 1 the coefficients are rational integers and an
    odd-n gbent f is never 1-sparse.
    """
    if ps.decomposition.l < 2:
        raise PreconditionError("the sparsity criterion needs l >= 2")
    n = ps.decomposition.n
    sq_levels = _as_squares(levels)
    gbent = sq_levels == {1 << n}
    profile = ps.profile()
    for u in range(ps.size):
        c = int(profile[u])
        if c == 0:
            if gbent:
                return Verdict("sparsity", FAIL, u + 1, None, {"u": u, "support": 0}, "all coefficients vanish")
            continue
        if c > 1:
            return Verdict(
                "sparsity", FAIL, u + 1, None,
                {"u": u, "support": c, "alphas": [list(a) for a in ps.support(u)]},
                "more than one nonzero coefficient",
            )
        q = ps.nonzero_values(u)[0].abs_sq().as_rational_integer()
        if q not in sq_levels:
            return Verdict("sparsity", FAIL, u + 1, None, {"u": u, "squared": q}, "magnitude outside the level set")
    return Verdict(
        "sparsity", PASS, ps.size, None, None, "every u has at most one nonzero coefficient",
        {"alpha_star": [list(a) if a else None for a in ps.alpha_star()], "levels": sorted(sq_levels)},
    )


def common_argument_check(ps: PartitionSpectrum, u: int) -> bool:
    return charsum.common_argument(ps.nonzero_values(u))


def _cell_group(d: AdicDecomposition) -> charsum.FinAbGroup:
    return charsum.FinAbGroup([1 << d.l] * (d.r - 1))


def difference_stabilizer_trivial(ps: PartitionSpectrum, u: int) -> bool:
    """Stab(D(u) + D(u)) = {0} with D(u) = S(u) - S(u) in (Z_{2^l})^{r-1}."""
    S = ps.support(u)
    if not S:
        return True
    g = _cell_group(ps.decomposition)
    D = charsum.difference(S, S, g)
    return charsum.stabilizer(charsum.sumset(D, D, g), g) == frozenset([g.zero])


# affine family with common argument --------------------------------------------

def verify_plateaued_common_arg(d: AdicDecomposition, s: int = 0) -> Verdict:
    """All g_beta s-gplateaued plus per-u phase alignment certify f s-gplateaued.

    For s = 0 the difference-set hypothesis is not needed: a gbent top digit
    and common-argument coefficients already force f gbent.
    Hypothesis failures give INCONCLUSIVE; a non-plateaued g_beta gives FAIL,
    since every g_beta of an s-gplateaued f is s-gplateaued.
    """
    if d.l < 2 or d.r < 2:
        raise PreconditionError("need l >= 2 and r >= 2")
    budget = 1 << (d.k - d.l)
    betas = _all_betas(d)
    sq = _squared_batch(_beta_tables(d, betas), d.l)
    level = 1 << (d.n + s)
    ok_val = (sq[..., 1:] == 0).all(axis=-1) & ((sq[..., 0] == 0) | (sq[..., 0] == level))
    if s == 0:
        ok_val &= sq[..., 0] == level
    checks = len(betas)
    bad = np.argwhere(~ok_val)
    if len(bad):
        i, u = map(int, bad[0])
        return Verdict(
            "affine", FAIL, checks, budget, {"beta": betas[i].tolist(), "u": u},
            f"g_beta is not {s}-gplateaued",
        )
    if d.n % 2:
        return Verdict("affine", INCONCLUSIVE, checks, budget, {"n": d.n}, "the certificate is stated for even n only")
    ps = partition_coefficients(d)
    for u in range(ps.size):
        if not common_argument_check(ps, u):
            return Verdict("affine", INCONCLUSIVE, checks, budget, {"u": u, "hypothesis": "common-argument"},
                           "coefficients do not share one argument")
        if s > 0 and not difference_stabilizer_trivial(ps, u):
            return Verdict("affine", INCONCLUSIVE, checks, budget, {"u": u, "hypothesis": "trivial stabilizer"},
                           "Stab(D(u)+D(u)) is not trivial")
    return Verdict("affine", PASS, checks, budget, None, f"f certified {s}-gplateaued", {"s": s})


# basis test -----------------------------------------------------------------

def verify_basis_test(d: AdicDecomposition) -> Verdict:
    """Gbent certificate from the r-1 basis functions c_{r-1} + c_j.

    Requires Z_{2^l}-affine lower digits, per-u common argument and even n;
    otherwise INCONCLUSIVE.
    """
    from .crypto import is_affine

    if d.l < 2 or d.r < 2:
        raise PreconditionError("need l >= 2 and r >= 2")
    budget = d.r - 1
    betas = np.eye(d.r - 1, dtype=np.int64)
    sq = _squared_batch(_beta_tables(d, betas), d.l)
    full = 1 << d.n
    ok = (sq[..., 0] == full).all(axis=-1) & (sq[..., 1:] == 0).all(axis=(-1, -2))
    checks = d.r - 1
    if not ok.all():
        j = int(np.flatnonzero(~ok)[0])
        return Verdict("basis", FAIL, checks, budget, {"j": j}, f"basis function f_{j} is not gbent")
    for j, c in enumerate(d.lower_gbfs()):
        if not is_affine(c):
            return Verdict("basis", INCONCLUSIVE, checks, budget, {"component": j, "hypothesis": "affine"},
                           f"lower digit c_{j} is not affine over Z_{1 << d.l}")
    if d.n % 2:
        return Verdict("basis", INCONCLUSIVE, checks, budget, {"n": d.n}, "the certificate is stated for even n only")
    ps = partition_coefficients(d)
    for u in range(ps.size):
        if not common_argument_check(ps, u):
            return Verdict("basis", INCONCLUSIVE, checks, budget, {"u": u, "hypothesis": "common-argument"},
                           "coefficients do not share one argument")
    return Verdict("basis", PASS, checks, budget, None, "all basis functions gbent; f certified gbent")


# binary-component oracle ----------------------------------------------------------

def binary_budget(k: int) -> int:
    return 1 << (1 << (k - 1))


def binary_char_oracle(
    f: GBF, budget: int = 256, seed: int = 0, exhaustive: Optional[bool] = None
) -> Verdict:
    """a_{k-1} + F(a_0..a_{k-2}) bent for every Boolean F on k-1 bits.

    Exhaustive for k <= 3 (at most 16 F) or when requested; otherwise ``budget``
    random F are drawn and a run without counterexample is INCONCLUSIVE.
    """
    if f.k < 2:
        raise PreconditionError("the binary-component oracle needs k >= 2")
    total = binary_budget(f.k)
    if exhaustive is None:
        exhaustive = (1 << (f.k - 1)) <= 4
    if f.n % 2:
        return Verdict("binary", INCONCLUSIVE, 0, total, {"n": f.n}, "no Boolean bent functions exist for odd n")
    width = 1 << (f.k - 1)
    if exhaustive:
        if width > 16:
            raise PreconditionError(f"exhaustive oracle over 2^{width} maps is not feasible")
        Fs = ((np.arange(total)[:, None] >> np.arange(width)[None, :]) & 1).astype(np.int64)
    else:
        rng = np.random.default_rng(seed)
        Fs = rng.integers(0, 2, size=(budget, width))
    low = f.table & (width - 1)
    high = (f.table >> (f.k - 1)) & 1
    checks = 0
    chunk = max(1, (1 << 22) // f.size)
    for lo in range(0, len(Fs), chunk):
        g = high[None, :] ^ Fs[lo : lo + chunk][:, low]
        w = (1 - 2 * g)[:, :, None].copy()
        butterfly(w)
        bent = np.all(w[:, :, 0] ** 2 == f.size, axis=1)
        checks += len(g)
        if not bent.all():
            i = lo + int(np.flatnonzero(~bent)[0])
            checks = i + 1
            return Verdict(
                "binary", FAIL, checks, total if exhaustive else budget,
                {"F": Fs[i].tolist()}, "component combination is not bent",
            )
    if exhaustive:
        return Verdict("binary", PASS, checks, total, None, "every component combination is bent")
    return Verdict("binary", INCONCLUSIVE, checks, budget, None, "sampled maps found no counterexample", {"seed": seed})


# duality --------------------------------------------------------------------------

def dual_lower_digits(d: AdicDecomposition) -> list:
    """alpha*(u) for gbent f, checked against the lower digits of the dual.

    When sqrt(2) is needed (n odd) and l = 2, the unit sqrt(2) zeta_8^{-1}
    lies in Z[i], so the cell carries the digits of rho + 2^{k-3}.
    """
    rep = classify(d.f)
    if rep.verdict != "gbent":
        raise PreconditionError("dual digits are defined for gbent f only")
    ps = partition_coefficients(d)
    stars = ps.alpha_star()
    shift = (1 << (d.k - 3)) if (d.n % 2 and d.l == 2) else 0
    mask = (1 << (d.k - d.l)) - 1
    out = []
    for u, a in enumerate(stars):
        if a is None:
            raise TheoremViolation(f"gbent f has no unique nonzero cell at u={u}")
        rho = dual_exponent(d.f, u, rep)
        if rho is None:
            raise TheoremViolation(f"no dual exponent at u={u}")
        if d.code(a) != (rho + shift) & mask:
            raise TheoremViolation(f"alpha*({u}) = {a} disagrees with dual exponent {rho}")
        out.append(a)
    return out


def export_json(ps: PartitionSpectrum) -> str:
    return json.dumps(ps.to_json())
