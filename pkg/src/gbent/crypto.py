"""Derivatives, degree tests, differential tables, Maiorana-McFarland functions
and S-box audits for functions F_2^n -> Z_{2^k}.

Derivatives use the binary shift x -> x XOR a and modular differences:
D_{a_1..a_t} f(x) = sum_{S} (-1)^{|S|} f(x + sum_{i in S} a_i) mod 2^k.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from .adic import AdicDecomposition, check_necessity, decompose
from .errors import PreconditionError, TheoremViolation
from .gbf import GBF, classify, cluster_values


# derivatives ----------------------------------------------------------------
# Batched routines take a (F, 2^n) array of truth tables and return per-table
# results; the single-function API calls them with F = 1.

def _batch(tables) -> np.ndarray:
    t = np.asarray(tables, dtype=np.int64)
    return t.reshape(-1, t.shape[-1])


def integer_derivative_batch(tables, dirs: Sequence[int]) -> np.ndarray:
    """Unreduced alternating sums sum_S (-1)^{|S|} t(x XOR sum_{i in S} a_i)."""
    t = _batch(tables)
    x = np.arange(t.shape[1])
    out = np.zeros_like(t)
    for S in itertools.product((0, 1), repeat=len(dirs)):
        shift = 0
        for bit, a in zip(S, dirs):
            if bit:
                shift ^= a
        out += (-1) ** sum(S) * t[:, x ^ shift]
    return out


def integer_derivative(table, dirs: Sequence[int]) -> np.ndarray:
    return integer_derivative_batch(table, dirs)[0]


def derivative(f: GBF, dirs: Sequence[int]) -> GBF:
    if len(dirs) < 1:
        raise PreconditionError("need at least one direction")
    return GBF(f.n, f.k, integer_derivative(f.table, dirs) % (1 << f.k))


def _digits(t: np.ndarray, k: int, l: int) -> list[np.ndarray]:
    mask = (1 << l) - 1
    return [(t >> (j * l)) & mask for j in range(k // l)]


def derivative_identity_batch(tables, k: int, l: int, dirs: Sequence[int]) -> np.ndarray:
    """D f = sum_j (D c_j) 2^{jl} mod 2^k, with D c_j the unreduced integer derivative."""
    t = _batch(tables)
    lhs = integer_derivative_batch(t, dirs) % (1 << k)
    rhs = sum(integer_derivative_batch(c, dirs) << (j * l) for j, c in enumerate(_digits(t, k, l))) % (1 << k)
    return np.all(lhs == rhs, axis=1)


def derivative_digits_batch(tables, k: int, l: int, dirs: Sequence[int]) -> np.ndarray:
    """Digit j of D f equals D c_j computed over Z_{2^l}, for every j."""
    t = _batch(tables)
    Df = integer_derivative_batch(t, dirs) % (1 << k)
    ok = np.ones(len(t), dtype=bool)
    for dj, c in zip(_digits(Df, k, l), _digits(t, k, l)):
        ok &= np.all(dj == integer_derivative_batch(c, dirs) % (1 << l), axis=1)
    return ok


def derivative_identity(f: GBF, l: int, dirs: Sequence[int]) -> bool:
    decompose(f, l)
    return bool(derivative_identity_batch(f.table, f.k, l, dirs)[0])


def derivative_digits_match(f: GBF, l: int, dirs: Sequence[int]) -> bool:
    decompose(f, l)
    return bool(derivative_digits_batch(f.table, f.k, l, dirs)[0])


def second_derivatives_constant_batch(tables, k: int) -> np.ndarray:
    """True where every D_{a,b} t is constant in x (values mod 2^k)."""
    t = _batch(tables)
    M = t.shape[1]
    x = np.arange(M)
    xa = x[:, None, None] ^ x[None, None, :]  # [a, b, x] -> x + a
    xb = x[None, :, None] ^ x[None, None, :]
    xab = xa ^ x[None, :, None]
    ok = np.ones(len(t), dtype=bool)
    step = max(1, (1 << 22) // (M ** 3))
    for lo in range(0, len(t), step):
        tt = t[lo : lo + step]
        v = (tt[:, None, None, :] - tt[:, xa] - tt[:, xb] + tt[:, xab]) % (1 << k)
        ok[lo : lo + step] = np.all(v == v[..., :1], axis=(1, 2, 3))
    return ok


def is_quadratic(f: GBF) -> bool:
    """True iff every second derivative D_{a,b} f is constant."""
    return bool(second_derivatives_constant_batch(f.table, f.k)[0])


def components_quadratic_batch(tables, k: int, l: int) -> np.ndarray:
    t = _batch(tables)
    ok = np.ones(len(t), dtype=bool)
    for c in _digits(t, k, l):
        ok &= second_derivatives_constant_batch(c, l)
    return ok


def components_quadratic(f: GBF, l: int) -> bool:
    """Every 2^l-adic digit has constant second derivatives over Z_{2^l}."""
    decompose(f, l)
    return bool(components_quadratic_batch(f.table, f.k, l)[0])


def is_affine(f: GBF) -> bool:
    """f - f(0) is a group homomorphism F_2^n -> Z_{2^k}, i.e. every D_{a,b} f vanishes.

    Homomorphisms from F_2^n land in {0, 2^{k-1}}, so affine means
    f(0) + 2^{k-1} <w, x>.  A weighted sum sum_i w_i x_i with 4 w_i != 0 is
    not affine in this sense: D_{a,a} of it is sum_{i in a} w_i (4 x_i - 2).
    """
    t = f.table
    x = np.arange(f.size)
    v = (t[x[:, None] ^ x[None, :]] - t[:, None] - t[None, :] + t[0]) % (1 << f.k)
    return not v.any()


# differential tables ---------------------------------------------------------

def ddt_batch(tables, k: int, mode: str = "modular") -> np.ndarray:
    """Counts Delta(a, b) for every table: shape (F, 2^n, 2^k)."""
    t = _batch(tables)
    F, M = t.shape
    q = 1 << k
    x = np.arange(M)
    out = np.zeros((F, M, q), dtype=np.int64)
    rows = np.arange(F)[:, None]
    for a in range(M):
        if mode == "modular":
            diff = (t[:, x ^ a] - t) % q
        elif mode == "xor":
            diff = t[:, x ^ a] ^ t
        else:
            raise ValueError(f"unknown mode {mode!r}")
        np.add.at(out[:, a, :], (np.broadcast_to(rows, diff.shape), diff), 1)
    return out


@dataclass
class DifferentialTable:
    counts: np.ndarray  # (2^n, 2^k) indexed [a, b]; row a = 0 included
    mode: str  # "modular" or "xor"

    def __post_init__(self):
        if np.any(self.counts < 0) or np.any(self.counts.sum(axis=1) != self.counts.shape[0]):
            raise TheoremViolation("differential table rows must sum to 2^n")

    @property
    def uniformity(self) -> int:
        return int(self.counts[1:].max()) if self.counts.shape[0] > 1 else 0

    def spectrum(self) -> dict:
        vals, cnt = np.unique(self.counts[1:], return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnt)}

    def __getitem__(self, ab) -> int:
        return int(self.counts[ab])

    def to_dict(self) -> dict:
        return {"mode": self.mode, "uniformity": self.uniformity, "spectrum": self.spectrum()}


def ddt(f: GBF, mode: str = "modular") -> DifferentialTable:
    """Delta(a, b) = #{x : f(x+a) - f(x) = b}; ``mode="xor"`` uses XOR differences."""
    return DifferentialTable(ddt_batch(f.table, f.k, mode)[0], mode)


def differential_bound_batch(tables, k: int, l: int) -> np.ndarray:
    """Delta_f(a,b) <= min_j Delta_{c_j}(a, b_j) for all a != 0, b."""
    t = _batch(tables)
    T = ddt_batch(t, k)
    b = np.arange(1 << k)
    bound = None
    for j, c in enumerate(_digits(t, k, l)):
        C = ddt_batch(c, l)[:, :, (b >> (j * l)) & ((1 << l) - 1)]
        bound = C if bound is None else np.minimum(bound, C)
    return np.all(T[:, 1:] <= bound[:, 1:], axis=(1, 2))


def differential_bound_holds(f: GBF, l: int) -> tuple[bool, Optional[dict]]:
    """The min-over-digits bound with the first failing (a, b), if any."""
    decompose(f, l)
    T = ddt_batch(f.table, f.k)[0]
    b = np.arange(1 << f.k)
    bound = np.min(
        [ddt_batch(c, l)[0][:, (b >> (j * l)) & ((1 << l) - 1)] for j, c in enumerate(_digits(f.table, f.k, l))],
        axis=0,
    )
    bad = np.argwhere(T[1:] > bound[1:])
    if len(bad):
        a, bb = int(bad[0][0]) + 1, int(bad[0][1])
        return False, {"a": a, "b": bb, "count": int(T[a, bb]), "bound": int(bound[a, bb])}
    return True, None


def c0_differential_bound_holds(f: GBF, l: int) -> bool:
    """Delta_f(a,b) <= Delta_{c_0}(a, b mod 2^l): the lowest digit sees no borrow."""
    d = decompose(f, l)
    T = ddt(f).counts
    C = ddt(GBF(f.n, l, d.components[0])).counts
    b = np.arange(1 << f.k) & ((1 << l) - 1)
    return bool(np.all(T[1:] <= C[1:, b]))


def gbeta_differentials_batch(tables, k: int, l: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Delta_{g_beta}(a, b) for every beta two ways.

    Returns (betas, direct, via_cells) with counts shaped (F, B, 2^n, 2^l):
    ``direct`` counts on each g_beta table, ``via_cells`` histograms the joint
    digit differences delta and sums the cells with
    delta_{r-1} + sum beta_j delta_j = b.
    """
    t = _batch(tables)
    F, M = t.shape
    r = k // l
    q = 1 << l
    comps = np.stack(_digits(t, k, l), axis=1)  # (F, r, M)
    betas = np.array(list(itertools.product(range(q), repeat=r - 1)), dtype=np.int64).reshape(-1, r - 1)
    g = (comps[:, -1][:, None, :] + np.einsum("bj,fjm->fbm", betas, comps[:, :-1])) % q  # (F, B, M)
    x = np.arange(M)
    direct = np.zeros((F, len(betas), M, q), dtype=np.int64)
    via = np.zeros_like(direct)
    weights = np.concatenate([betas, np.ones((len(betas), 1), dtype=np.int64)], axis=1)  # (B, r)
    place = q ** np.arange(r)
    codes_all = (np.arange(q ** r)[:, None] // place) % q  # (q^r, r), digit j at column j
    target = (codes_all @ weights.T) % q  # (q^r, B)
    onehot = target[:, :, None] == np.arange(q)[None, None, :]  # (q^r, B, q)
    for a in range(M):
        dg = (g[:, :, x ^ a] - g) % q
        direct[:, :, a, :] = (dg[..., None] == np.arange(q)).sum(axis=2)
        delta = (comps[:, :, x ^ a] - comps) % q  # (F, r, M)
        code = np.einsum("frm,r->fm", delta, place)
        hist = np.zeros((F, q ** r), dtype=np.int64)
        np.add.at(hist, (np.repeat(np.arange(F), M), code.reshape(-1)), 1)
        via[:, :, a, :] = np.einsum("fc,cbq->fbq", hist, onehot.astype(np.int64))
    return betas, direct, via


@dataclass
class GBetaDifferential:
    direct: int
    via_cells: int
    cells: dict
    uniformity_bound: Optional[int] = None
    f_bound_ok: Optional[bool] = None


def joint_differential_cells(d: AdicDecomposition, a: int) -> dict:
    """|S_delta| for delta = (c_j(x+a) - c_j(x))_j."""
    x = np.arange(d.f.size)
    deltas = (d.components[:, x ^ a] - d.components) % (1 << d.l)
    cells: dict = {}
    for col in deltas.T:
        key = tuple(int(v) for v in col)
        cells[key] = cells.get(key, 0) + 1
    return cells


def diff_gbeta_formula(
    d: AdicDecomposition, beta: Sequence[int], a: int, b: int, component_delta: Optional[int] = None
) -> GBetaDifferential:
    """Delta_{g_beta}(a,b) directly and through the joint cells S_delta."""
    from .adic import derived_beta

    if d.r < 2:
        raise PreconditionError("need r >= 2")
    g = derived_beta(d, beta)
    q = 1 << d.l
    x = np.arange(g.size)
    direct = int(np.count_nonzero((g.table[x ^ a] - g.table) % q == b % q))
    cells = joint_differential_cells(d, a)
    via = 0
    for delta, size in cells.items():
        if (delta[-1] + sum(bj * dj for bj, dj in zip(beta, delta[:-1]))) % q == b % q:
            via += size
    if direct != via:
        raise TheoremViolation(f"two differential counts disagree: {direct} vs {via}")
    out = GBetaDifferential(direct, via, cells)
    if component_delta is not None and a != 0:
        out.uniformity_bound = component_delta * (1 << (d.l * (d.r - 1)))
        if direct > out.uniformity_bound:
            raise TheoremViolation("g_beta exceeds the component uniformity bound")
        out.f_bound_ok = ddt(d.f).uniformity <= component_delta
    return out


def component_uniformity(d: AdicDecomposition) -> int:
    return max(ddt(GBF(d.n, d.l, c)).uniformity for c in d.components)


# Maiorana-McFarland ---------------------------------------------------------

@dataclass
class MMResult:
    f: GBF
    phi: np.ndarray  # digits of N(x, y) alone, shape (r, 2^{2m})
    digits: np.ndarray  # exact digits of f
    formula: np.ndarray  # one-step carry formula digits
    formula_mismatch: np.ndarray  # bool per (j, index)

    @property
    def carry_flag(self) -> bool:
        return bool(self.formula_mismatch.any())


def mm_construct(m: int, perm: Sequence[int], g: GBF, l: Optional[int] = None, scale: int = 1) -> MMResult:
    """f(x, y) = scale N(x, y) + g(y) mod 2^k with N = sum x_i pi(y)_i over the integers.

    The input index is x + 2^m y.  ``l`` (default k) sets the digit size for
    the digit report.  With scale = 1 and k >= 2 the result is usually not
    gbent; scale = 2^{k-1} gives the gbent family.
    """
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(1 << m)):
        raise ValueError("pi must be a permutation of F_2^m")
    if g.n != m:
        raise ValueError("g must be defined on F_2^m")
    k = g.k
    l = k if l is None else l
    if k % l:
        raise ValueError("l must divide k")
    r = k // l
    idx = np.arange(1 << (2 * m))
    x = idx & ((1 << m) - 1)
    y = idx >> m
    py = np.array(perm)[y]
    N = np.zeros_like(idx)
    for i in range(m):
        N += ((x >> i) & 1) * ((py >> i) & 1)
    N = N * scale
    gy = g.table[y]
    total = (N + gy) % (1 << k)
    f = GBF(2 * m, k, total)
    mask = (1 << l) - 1
    phi = np.stack([(N >> (j * l)) & mask for j in range(r)])
    gd = np.stack([(gy >> (j * l)) & mask for j in range(r)])
    digits = np.stack([(total >> (j * l)) & mask for j in range(r)])
    formula = np.empty_like(digits)
    for j in range(r):
        carry = (phi[j - 1] + gd[j - 1]) >> l if j > 0 else 0
        formula[j] = (phi[j] + gd[j] + carry) & mask
    return MMResult(f, phi, digits, formula, formula != digits)


# S-boxes --------------------------------------------------------------------

@dataclass
class SboxFixture:
    name: str
    n: int
    k: int
    table: list
    provenance: str = ""
    permutation: Optional[bool] = None

    def __post_init__(self):
        if len(self.table) != 1 << self.n or any(not 0 <= v < 1 << self.k for v in self.table):
            raise ValueError(f"S-box {self.name!r}: table does not map {self.n} bits to {self.k} bits")
        if self.permutation and sorted(self.table) != list(range(1 << self.n)):
            raise ValueError(f"S-box {self.name!r} is declared a permutation but is not one")

    @classmethod
    def from_hex(cls, hexstr: str, name: str = "custom") -> "SboxFixture":
        s = hexstr.strip().lower().removeprefix("0x")
        if not s or any(c not in "0123456789abcdef" for c in s):
            raise ValueError(f"malformed hex S-box {hexstr!r}")
        n = len(s).bit_length() - 1
        if 1 << n != len(s):
            raise ValueError("hex S-box length must be a power of two")
        table = [int(c, 16) for c in s]
        return cls(name, n, 4, table, "inline hex")

    @classmethod
    def from_json(cls, d: dict) -> "SboxFixture":
        table = d.get("table") or d.get("lut")
        if not isinstance(table, list):
            raise ValueError("S-box JSON needs a 'table' list")
        n = int(d.get("n", len(table).bit_length() - 1))
        k = int(d.get("k", max(1, max(table).bit_length())))
        return cls(d.get("name", "custom"), n, k, [int(v) for v in table], d.get("provenance", ""), d.get("permutation"))

    def as_gbf(self) -> GBF:
        return GBF(self.n, self.k, self.table)


def load_presets() -> dict:
    text = resources.files("gbent").joinpath("data/sboxes.json").read_text()
    return {name: SboxFixture(name=name, **spec) for name, spec in json.loads(text).items()}


def preset(name: str) -> SboxFixture:
    presets = load_presets()
    key = name.upper()
    if key not in presets:
        raise ValueError(f"unknown preset {name!r}; known: {sorted(presets)}")
    return presets[key]


def sbox_audit(s: SboxFixture, l: Optional[int] = 2, seed: int = 0, samples: int = 20) -> dict:
    """Spectral and differential audit of an S-box read as F_2^n -> Z_{2^k}."""
    f = s.as_gbf()
    rep = classify(f)
    mags = rep.magnitudes
    distinct = cluster_values(mags, 1e-6)
    out = {
        "name": s.name,
        "n": s.n,
        "k": s.k,
        "provenance": s.provenance,
        "permutation": sorted(s.table) == list(range(1 << s.n)),
        "verdict": rep.label(),
        "landscape": rep.is_landscape,
        "distinct_magnitudes": len(distinct),
        "magnitudes": [float(m) for m in mags],
        "squared_exact": [q.as_rational_integer() if q.as_rational_integer() is not None else list(q.coeffs) for q in rep.squared],
        "rational_squares": {u: q.as_rational_integer() for u, q in enumerate(rep.squared) if q.as_rational_integer() is not None},
        "ddt_modular": ddt(f).to_dict(),
        "ddt_xor": ddt(f, "xor").to_dict() if s.n == s.k else None,
        "seed": seed,
    }
    if l is not None and s.k % l == 0 and l >= 2 and s.k // l >= 2:
        d = decompose(f, l)
        nec = check_necessity(d, samples=samples, seed=seed, require_landscape=False)
        out["necessity"] = {"l": l, **nec.to_dict(), "holds": nec.ok}
    return out


def audit_text(report: dict) -> str:
    lines = [
        f"S-box {report['name']} (n={report['n']}, k={report['k']})",
        f"  verdict: {report['verdict']}",
        f"  distinct magnitudes: {report['distinct_magnitudes']}",
        "  |W(u)|: " + ", ".join(f"{m:.3f}" for m in report["magnitudes"]),
        "  rational |W(u)|^2: " + ", ".join(f"u={u}: {v}" for u, v in report["rational_squares"].items()),
        f"  modular differential uniformity: {report['ddt_modular']['uniformity']}",
    ]
    if report.get("ddt_xor"):
        lines.append(f"  XOR differential uniformity: {report['ddt_xor']['uniformity']}")
    if "necessity" in report:
        nec = report["necessity"]
        status = "all derived magnitudes match" if nec["holds"] else f"{len(nec['violations'])} mismatching derived functions (first: {nec['violations'][0]})"
        lines.append(f"  2^{nec['l']}-adic derived functions: {status}")
    lines.append(f"  seed: {report['seed']}")
    return "\n".join(lines)
