"""Character sums on finite abelian groups Z_{m_1} x ... x Z_{m_t}.

Conventions: characters are indexed by dual tuples y with
chi_y(x) = prod exp(2 pi i x_i y_i / m_i), and the transform of a weighted
support mu is S_chi = sum_i z_i chi(alpha_i).  This differs from the
conjugated convention only by chi -> conj(chi), so magnitudes agree.

Exact mode is used when every modulus is a power of two and all weights are
cyclotomic integers; characters and weights then live in one ring
Z[zeta_{2^K}].  Otherwise values are complex floats compared with a 1e-9
tolerance.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import reduce
from math import gcd, isqrt
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .cyclotomic import MAX_K, CycInt, degree, lift_exponents, mul_array, real_sign
from .errors import HypothesisNotMet, PreconditionError, TheoremViolation

FLOAT_TOL = 1e-9
LEVEL_RTOL = 1e-7
MAX_ORDER = 4096

Element = tuple
Scalar = Union[CycInt, complex]


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _is_pow2(m: int) -> bool:
    return m >= 1 and m & (m - 1) == 0


# groups ---------------------------------------------------------------------

class FinAbGroup:
    """Z_{m_1} x ... x Z_{m_t}; elements are tuples of residues."""

    def __init__(self, moduli: Sequence[int]):
        moduli = tuple(int(m) for m in moduli)
        if not moduli or any(m < 1 for m in moduli):
            raise ValueError(f"moduli must be a nonempty list of positive integers, got {moduli}")
        self.moduli = moduli
        self.order = int(np.prod(moduli))
        if self.order > MAX_ORDER:
            raise ValueError(f"group order {self.order} exceeds the supported {MAX_ORDER}")
        self.zero = tuple(0 for _ in moduli)
        self.exponent = reduce(_lcm, moduli, 1)
        self._elements: Optional[list[Element]] = None

    def __repr__(self) -> str:
        return "FinAbGroup(" + " x ".join(f"Z{m}" for m in self.moduli) + ")"

    def __eq__(self, other) -> bool:
        return isinstance(other, FinAbGroup) and self.moduli == other.moduli

    def __hash__(self) -> int:
        return hash(self.moduli)

    @property
    def is_two_power(self) -> bool:
        return all(_is_pow2(m) for m in self.moduli)

    @property
    def exponent_bits(self) -> int:
        return self.exponent.bit_length() - 1

    def elements(self) -> list[Element]:
        if self._elements is None:
            self._elements = [tuple(e) for e in itertools.product(*(range(m) for m in self.moduli))]
        return self._elements

    def element(self, x) -> Element:
        x = tuple(int(v) for v in (x if isinstance(x, (tuple, list)) else (x,)))
        if len(x) != len(self.moduli):
            raise ValueError(f"element {x} has wrong length for {self}")
        return tuple(v % m for v, m in zip(x, self.moduli))

    def add(self, a: Element, b: Element) -> Element:
        return tuple((x + y) % m for x, y, m in zip(a, b, self.moduli))

    def sub(self, a: Element, b: Element) -> Element:
        return tuple((x - y) % m for x, y, m in zip(a, b, self.moduli))

    def neg(self, a: Element) -> Element:
        return tuple((-x) % m for x, m in zip(a, self.moduli))

    def scale(self, c: int, a: Element) -> Element:
        return tuple((c * x) % m for x, m in zip(a, self.moduli))

    def order_of(self, a: Element) -> int:
        return reduce(_lcm, (m // gcd(x, m) for x, m in zip(a, self.moduli)), 1)

    def char_angle(self, y: Element, x: Element) -> float:
        return 2 * np.pi * sum(xi * yi / m for xi, yi, m in zip(x, y, self.moduli))

    def char_value(self, y: Element, x: Element) -> complex:
        return complex(np.exp(1j * self.char_angle(y, x)))

    def subgroup(self, gens: Iterable[Element]) -> frozenset:
        return closure(self, gens)

    def subgroups(self) -> list[frozenset]:
        """All subgroups, found by closing under one extra generator at a time."""
        found = {frozenset([self.zero])}
        frontier = list(found)
        while frontier:
            nxt = []
            for H in frontier:
                for g in self.elements():
                    if g in H:
                        continue
                    K = closure(self, list(H) + [g])
                    if K not in found:
                        found.add(K)
                        nxt.append(K)
            frontier = nxt
        return sorted(found, key=lambda s: (len(s), sorted(s)))

    def trivial_on(self, H: Iterable[Element]) -> list[Element]:
        """Characters chi_y of G trivial on the subgroup H."""
        H = list(H)
        out = []
        for y in self.elements():
            if all(sum(h_i * y_i * (self.exponent // m) for h_i, y_i, m in zip(h, y, self.moduli)) % self.exponent == 0 for h in H):
                out.append(y)
        return out

    def to_json(self) -> list[int]:
        return list(self.moduli)


class Quotient:
    """G/H with each coset named by its smallest element."""

    def __init__(self, group: FinAbGroup, H: Iterable[Element]):
        self.group = group
        self.H = frozenset(H)
        if group.zero not in self.H:
            raise PreconditionError("H must contain 0")
        self._rep = {}
        for x in group.elements():
            if x not in self._rep:
                coset = [group.add(x, h) for h in self.H]
                r = min(coset)
                for c in coset:
                    self._rep[c] = r
        self.reps = sorted(set(self._rep.values()))
        self.order = len(self.reps)
        self.zero = self._rep[group.zero]

    def pi(self, x: Element) -> Element:
        return self._rep[self.group.element(x)]

    def elements(self) -> list[Element]:
        return self.reps

    def add(self, a: Element, b: Element) -> Element:
        return self._rep[self.group.add(a, b)]

    def sub(self, a: Element, b: Element) -> Element:
        return self._rep[self.group.sub(a, b)]

    def neg(self, a: Element) -> Element:
        return self._rep[self.group.neg(a)]

    def order_of(self, a: Element) -> int:
        x, j = a, 1
        while x != self.zero:
            x = self.add(x, a)
            j += 1
        return j

    def coset(self, r: Element) -> frozenset:
        return frozenset(self.group.add(r, h) for h in self.H)


def closure(g, gens: Iterable[Element]) -> frozenset:
    gens = [g.element(x) if isinstance(g, FinAbGroup) else x for x in gens]
    H = {g.zero}
    frontier = [g.zero]
    while frontier:
        nxt = []
        for a in frontier:
            for s in gens:
                b = g.add(a, s)
                if b not in H:
                    H.add(b)
                    nxt.append(b)
        frontier = nxt
    return frozenset(H)


# sumset toolkit -------------------------------------------------------------

def _nonempty(*sets):
    for s in sets:
        if not s:
            raise PreconditionError("sumset operands must be nonempty")


def sumset(A: Iterable, B: Iterable, g) -> frozenset:
    A, B = list(A), list(B)
    _nonempty(A, B)
    return frozenset(g.add(a, b) for a in A for b in B)


def difference(A: Iterable, B: Iterable, g) -> frozenset:
    A, B = list(A), list(B)
    _nonempty(A, B)
    return frozenset(g.sub(a, b) for a in A for b in B)


def iterated_sumset(A: Iterable, k: int, g) -> frozenset:
    """kA = A + ... + A (k summands), k >= 1."""
    A = frozenset(A)
    _nonempty(A)
    if k < 1:
        raise PreconditionError("k must be >= 1")
    out = A
    for _ in range(k - 1):
        out = sumset(out, A, g)
    return out


def stabilizer(S: Iterable, g) -> frozenset:
    S = frozenset(S)
    _nonempty(S)
    return frozenset(h for h in g.elements() if all(g.add(s, h) in S for s in S))


def is_subgroup(H: Iterable, g) -> bool:
    H = frozenset(H)
    return g.zero in H and all(g.sub(a, b) in H for a in H for b in H)


@dataclass
class GrowthReport:
    H: frozenset
    quotient_order: int
    D_bar: frozenset
    stab_trivial: bool
    sizes: list[int]
    bounds: list[int]
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def sumset_growth_check(D: Iterable, g: FinAbGroup, kmax: int = 6) -> GrowthReport:
    """Iterated-sumset growth of the image of D in G/Stab(D+D).

    Checks Stab(D'+D') = {0} in the quotient, |kD'| >= min(|G/H|, k(|D'|-1)+1)
    for k <= kmax, and strict growth below |G/H|.  Failures are listed, not raised.
    """
    D = frozenset(g.element(d) for d in D)
    if g.zero not in D:
        raise PreconditionError("0 must lie in D")
    H = stabilizer(sumset(D, D, g), g)
    Q = Quotient(g, H)
    Db = frozenset(Q.pi(d) for d in D)
    stab = stabilizer(sumset(Db, Db, Q), Q)
    rep = GrowthReport(H, Q.order, Db, stab == frozenset([Q.zero]), [], [])
    if not rep.stab_trivial:
        rep.violations.append(f"Stab(D'+D') = {sorted(stab)} is not trivial")
    kD = Db
    for k in range(1, kmax + 1):
        bound = min(Q.order, k * (len(Db) - 1) + 1)
        rep.sizes.append(len(kD))
        rep.bounds.append(bound)
        if len(kD) < bound:
            rep.violations.append(f"|{k}D'| = {len(kD)} < {bound}")
        nxt = sumset(kD, Db, Q)
        if len(Db) >= 2 and len(kD) < Q.order and len(nxt) <= len(kD):
            rep.violations.append(f"no growth from {k}D' to {k + 1}D' (size {len(kD)})")
        kD = nxt
    return rep


# weighted supports ----------------------------------------------------------

def _as_complex(z) -> complex:
    return z.to_complex() if isinstance(z, CycInt) else complex(z)


def _is_zero(z, scale: float = 1.0) -> bool:
    if isinstance(z, CycInt):
        return z.is_zero()
    return abs(z) <= FLOAT_TOL * max(1.0, scale)


def _conj(z):
    return z.conj() if isinstance(z, CycInt) else complex(z).conjugate()


class WeightedSupport:
    """A function mu on G given by its support points and nonzero weights."""

    def __init__(self, group: FinAbGroup, points: Sequence, weights: Sequence):
        pts = [group.element(p) for p in points]
        if len(set(pts)) != len(pts):
            raise ValueError("support points must be distinct")
        if len(pts) != len(weights):
            raise ValueError("points and weights differ in length")
        self.group = group
        exact_ok = group.is_two_power and all(isinstance(w, (int, np.integer, CycInt)) for w in weights)
        if exact_ok:
            ks = [w.k for w in weights if isinstance(w, CycInt)]
            K = max([1, group.exponent_bits] + ks)
            if K > MAX_K:
                exact_ok = False
        if exact_ok:
            ws = []
            for w in weights:
                w = CycInt.from_int(K, int(w)) if not isinstance(w, CycInt) else w.embed(K)
                if w.is_zero():
                    raise ValueError("weights must be nonzero")
                ws.append(w)
            self.exact, self.K = True, K
        else:
            ws = [_as_complex(w) for w in weights]
            if any(abs(w) ** 2 <= 1e-18 for w in ws):
                raise ValueError("weights must be nonzero")
            self.exact, self.K = False, None
        order = sorted(range(len(pts)), key=lambda i: pts[i])
        self.points = tuple(pts[i] for i in order)
        self.weights = tuple(ws[i] for i in order)

    @classmethod
    def from_mapping(cls, group: FinAbGroup, mapping: dict) -> "WeightedSupport":
        scale = max([abs(_as_complex(v)) for v in mapping.values()] + [1.0])
        items = [(p, w) for p, w in mapping.items() if not _is_zero(w, scale)]
        return cls(group, [p for p, _ in items], [w for _, w in items])

    def as_mapping(self) -> dict:
        return dict(zip(self.points, self.weights))

    @property
    def support(self) -> frozenset:
        return frozenset(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        mode = f"exact K={self.K}" if self.exact else "float"
        return f"WeightedSupport({self.group!r}, {len(self)} points, {mode})"

    def sq_norm(self):
        """sum |z_i|^2, exact when possible."""
        if self.exact:
            return reduce(lambda a, b: a + b, (w.abs_sq() for w in self.weights))
        return float(sum(abs(w) ** 2 for w in self.weights))

    def scale(self) -> float:
        return float(np.sqrt(sum(abs(_as_complex(w)) ** 2 for w in self.weights)))

    def to_json(self) -> dict:
        ws = []
        for w in self.weights:
            if isinstance(w, CycInt):
                ws.append({"cyc_k": w.k, "coeffs": list(w.coeffs)})
            else:
                ws.append({"re": w.real, "im": w.imag})
        return {"moduli": self.group.to_json(), "points": [list(p) for p in self.points], "weights": ws}

    @classmethod
    def from_json(cls, d: dict) -> "WeightedSupport":
        try:
            g = FinAbGroup(d["moduli"])
            points = [tuple(p) for p in d["points"]]
            weights = []
            for w in d["weights"]:
                if "cyc_k" in w:
                    weights.append(CycInt(int(w["cyc_k"]), [int(c) for c in w["coeffs"]]))
                else:
                    weights.append(complex(float(w.get("re", 0.0)), float(w.get("im", 0.0))))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed character-sum instance: {exc}") from exc
        return cls(g, points, weights)

    @classmethod
    def load(cls, path) -> "WeightedSupport":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


# transforms -----------------------------------------------------------------

@dataclass
class CharacterValues:
    group: FinAbGroup
    characters: list[Element]
    values: list  # CycInt in exact mode, complex otherwise
    exact: bool
    scale: float = 1.0

    def squared(self) -> list:
        if self.exact:
            return [v.abs_sq() for v in self.values]
        return [abs(v) ** 2 for v in self.values]

    def nonzero(self) -> list[bool]:
        return [not _is_zero(v, self.scale) for v in self.values]

    def magnitudes(self) -> np.ndarray:
        return np.array([abs(_as_complex(v)) for v in self.values])

    def __getitem__(self, y) -> Scalar:
        return self.values[self.characters.index(tuple(y))]


def _exponent_matrix(g: FinAbGroup, ys: list, xs: list, K: int) -> np.ndarray:
    M = 1 << K
    scale = np.array([M // m for m in g.moduli], dtype=np.int64)
    Y = np.array(ys, dtype=np.int64).reshape(len(ys), -1) * scale
    X = np.array(xs, dtype=np.int64).reshape(len(xs), -1)
    return (Y @ X.T) % M


def fourier(ws: WeightedSupport) -> CharacterValues:
    """S_chi = sum_i z_i chi(alpha_i) for every character."""
    g = ws.group
    ys = g.elements()
    if ws.exact:
        K = ws.K
        N = degree(K)
        Z = np.array([w.coeffs for w in ws.weights], dtype=np.int64)
        bound = max(1, int(np.abs(Z).max()))
        out = np.zeros((len(ys), N), dtype=object if bound * len(ws) >= 1 << 60 else np.int64)
        step = max(1, (1 << 22) // max(1, len(ws) * 2 * N))
        for lo in range(0, len(ys), step):
            E = _exponent_matrix(g, ys[lo : lo + step], list(ws.points), K)
            prod = mul_array(lift_exponents(E, K), Z[None, :, :], bound=bound)
            out[lo : lo + step] = prod.sum(axis=1)
        vals = [CycInt(K, row.tolist()) for row in out]
        return CharacterValues(g, ys, vals, True, ws.scale())
    Y = np.array(ys, dtype=np.float64)
    X = np.array(ws.points, dtype=np.float64)
    m = np.array(g.moduli, dtype=np.float64)
    ang = 2 * np.pi * (Y / m) @ X.T
    vals = np.exp(1j * ang) @ np.array(ws.weights, dtype=np.complex128)
    return CharacterValues(g, ys, [complex(v) for v in vals], False, ws.scale())


def inverse_fourier(cv: CharacterValues) -> dict:
    """Recover mu from its character sums (float)."""
    g = cv.group
    Y = np.array(cv.characters, dtype=np.float64)
    X = np.array(g.elements(), dtype=np.float64)
    m = np.array(g.moduli, dtype=np.float64)
    ang = 2 * np.pi * (X / m) @ Y.T
    vals = np.exp(-1j * ang) @ np.array([_as_complex(v) for v in cv.values]) / g.order
    return dict(zip(g.elements(), vals))


@dataclass
class LevelReport:
    levels: list  # distinct squared magnitudes including 0 when attained
    nonzero: list
    kind: str  # "two-level", "multi-level" or "zero"
    exact: bool
    has_zero: bool

    @property
    def t(self) -> int:
        return len(self.nonzero)


def _level_key(v) -> float:
    return _as_complex(v).real


def magnitude_levels(cv: CharacterValues) -> LevelReport:
    """Distinct values of |S_chi|^2, exact in exact mode."""
    sq = cv.squared()
    nz = cv.nonzero()
    has_zero = not all(nz)
    if cv.exact:
        distinct = set(q for q, keep in zip(sq, nz) if keep)
        nonzero = []
        for q in sorted(distinct, key=_level_key):
            r = q.as_rational_integer()
            nonzero.append(r if r is not None else q)
    else:
        vals = sorted(float(q) for q, keep in zip(sq, nz) if keep)
        nonzero = []
        for v in vals:
            if not nonzero or v - nonzero[-1] > LEVEL_RTOL * max(1.0, abs(v)):
                nonzero.append(v)
    levels = ([0] if has_zero else []) + nonzero
    if not nonzero:
        kind = "zero"
    elif len(nonzero) == 1:
        kind = "two-level"
    else:
        kind = "multi-level"
    return LevelReport(levels, nonzero, kind, cv.exact, has_zero)


def common_argument(values: Sequence[Scalar]) -> bool:
    """All nonzero values share one argument: z_i conj(z_j) real and positive.

    Comparing every value with the first is equivalent to the pairwise test.
    Realness is exact for cyclotomic values; positivity uses the float value
    with precision escalation near zero.
    """
    values = [v for v in values if not _is_zero(v)]
    if len(values) <= 1:
        return True
    ref = values[0]
    for v in values[1:]:
        if isinstance(v, CycInt) and isinstance(ref, CycInt):
            p = v * ref.conj()
            if not p.is_real() or real_sign(p) <= 0:
                return False
        else:
            p = _as_complex(v) * _as_complex(ref).conjugate()
            scale = max(1.0, abs(p))
            if abs(p.imag) > FLOAT_TOL * scale or p.real <= FLOAT_TOL * scale:
                return False
    return True


# two-point analysis ---------------------------------------------------------

@dataclass
class TwoPointReport:
    r: int
    magnitudes: list[float]
    case: str
    nonzero_levels: int


def two_point_analysis(g: FinAbGroup, alpha, beta, z1, z2) -> TwoPointReport:
    """Magnitudes of z1 chi(alpha) + z2 chi(beta) over all characters."""
    a, b = g.element(alpha), g.element(beta)
    if a == b:
        raise PreconditionError("alpha and beta must differ")
    z1, z2 = _as_complex(z1), _as_complex(z2)
    if z1 == 0 or z2 == 0:
        raise PreconditionError("weights must be nonzero")
    r = g.order_of(g.sub(b, a))
    mags = [abs(z1 + z2 * np.exp(2j * np.pi * j / r)) for j in range(r)]
    scale = max(abs(z1), abs(z2))
    distinct = []
    for v in sorted(mags):
        if not distinct or v - distinct[-1] > FLOAT_TOL * scale:
            distinct.append(v)
    distinct = [0.0 if v <= FLOAT_TOL * scale else v for v in distinct]
    nonzero = [v for v in distinct if v > 0]
    if r >= 4:
        case = "multi-valued"
        if len(nonzero) < 2:
            raise TheoremViolation(f"order {r} pair gave only {len(nonzero)} nonzero magnitude(s)")
    elif r == 3:
        w = -z1 / z2
        exceptional = abs(abs(z1) - abs(z2)) <= FLOAT_TOL * scale and abs(w ** 3 - 1) <= FLOAT_TOL and abs(w - 1) > FLOAT_TOL
        case = "exceptional" if exceptional else "generic"
        if exceptional:
            if len(nonzero) != 1 or abs(nonzero[0] - np.sqrt(3) * abs(z1)) > 1e-9 * scale or distinct[0] != 0.0:
                raise TheoremViolation("exceptional order-3 pair without levels {0, sqrt3 |z1|}")
        elif len(nonzero) < 2:
            raise TheoremViolation("generic order-3 pair with fewer than two nonzero magnitudes")
    else:
        case = "small-order"
    return TwoPointReport(r, distinct, case, len(nonzero))


# convolution, pushforward, autocorrelation ---------------------------------

def convolve(f: dict, h: dict, g) -> dict:
    out: dict = {}
    for x, a in f.items():
        for y, b in h.items():
            s = g.add(x, y)
            out[s] = out[s] + a * b if s in out else a * b
    return out


def reflect_conj(f: dict, g) -> dict:
    """x -> conj(f(-x))."""
    return {g.neg(x): _conj(v) for x, v in f.items()}


def drop_zeros(f: dict) -> dict:
    scale = max([abs(_as_complex(v)) for v in f.values()] + [1.0])
    return {x: v for x, v in f.items() if not _is_zero(v, scale)}


def pushforward(f: dict, Q: Quotient) -> dict:
    out: dict = {}
    for x, v in f.items():
        r = Q.pi(x)
        out[r] = out[r] + v if r in out else v
    return out


def quotient_fourier(fbar: dict, Q: Quotient, y: Element):
    """Transform of a pushforward at an H-trivial character chi_y of G."""
    g = Q.group
    total = 0j
    for r, v in fbar.items():
        total += _as_complex(v) * g.char_value(y, r)
    return total


@dataclass
class AutocorrelationReport:
    nu: WeightedSupport
    difference_set: frozenset
    support_equals_difference: bool
    strict_inclusion: bool
    common_argument: bool


def autocorrelation_report(ws: WeightedSupport) -> AutocorrelationReport:
    g = ws.group
    mu = ws.as_mapping()
    nu = drop_zeros(convolve(mu, reflect_conj(mu, g), g))
    D = difference(ws.points, ws.points, g)
    supp = frozenset(nu)
    if not supp <= D:
        raise TheoremViolation("autocorrelation support escaped S - S")
    ca = common_argument(ws.weights)
    if ca and supp != D:
        raise TheoremViolation("common-argument weights cancelled in the autocorrelation")
    nu_ws = WeightedSupport.from_mapping(g, nu)
    if ws.exact and nu_ws.exact:
        sq = fourier(ws).squared()
        got = fourier(nu_ws).values
        K = max(nu_ws.K, sq[0].k)
        if any(a.embed(K) != b.embed(K) for a, b in zip(got, sq)):
            raise TheoremViolation("transform of the autocorrelation differs from |S_chi|^2")
    return AutocorrelationReport(nu_ws, D, supp == D, supp < D, ca)


def autocorrelation(ws: WeightedSupport) -> WeightedSupport:
    """nu = mu * conj(mu(-x)); its transform is |S_chi|^2."""
    return autocorrelation_report(ws).nu


# uncertainty and numerology -------------------------------------------------

def divisors(n: int) -> list[int]:
    small = [d for d in range(1, isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def refined_bound(order: int, k: int) -> tuple[int, int, float]:
    """(d1, d2, bound) with d1 <= k <= d2 consecutive divisors of |G|."""
    ds = divisors(order)
    d1 = max(d for d in ds if d <= k)
    d2 = min(d for d in ds if d >= k)
    return d1, d2, order / (d1 * d2) * (d1 + d2 - k)


@dataclass
class UncertaintyReport:
    support: int
    fourier_support: int
    order: int
    d1: int
    d2: int
    refined: float
    equality: bool
    subgroup_form: bool

    @property
    def product(self) -> int:
        return self.support * self.fourier_support


def subgroup_form(ws: WeightedSupport) -> bool:
    """mu = c * chi * 1_{a+H} for a subgroup H, character chi, scalar c."""
    g = ws.group
    a = ws.points[0]
    H = frozenset(g.sub(p, a) for p in ws.points)
    if not is_subgroup(H, g):
        return False
    mu = ws.as_mapping()
    za = _as_complex(mu[a])
    phi = {h: _as_complex(mu[g.add(a, h)]) / za for h in H}
    for h1 in H:
        for h2 in H:
            if abs(phi[g.add(h1, h2)] - phi[h1] * phi[h2]) > 1e-9:
                return False
    return True


def uncertainty_check(ws: WeightedSupport) -> UncertaintyReport:
    """|supp mu| |supp mu^| >= |G| and the divisor refinement; raises on violation."""
    if len(ws) == 0:
        raise PreconditionError("the zero function has no uncertainty bound")
    g = ws.group
    cv = fourier(ws)
    fs = sum(cv.nonzero())
    k = len(ws)
    d1, d2, bound = refined_bound(g.order, k)
    rep = UncertaintyReport(k, fs, g.order, d1, d2, bound, k * fs == g.order, subgroup_form(ws))
    if k * fs < g.order:
        raise TheoremViolation(f"|supp f| |supp f^| = {k * fs} < |G| = {g.order}")
    if fs < bound - 1e-9:
        raise TheoremViolation(f"|supp f^| = {fs} below the divisor bound {bound}")
    if rep.equality != rep.subgroup_form:
        raise TheoremViolation("equality case does not match the subgroup-indicator form")
    return rep


@dataclass
class NumerologyReport:
    N: int
    A2: object
    lhs: object
    rhs: object
    support_lower_bound: float


def numerology_check(ws: WeightedSupport) -> NumerologyReport:
    """N A^2 = |G| sum |f|^2 for a two-level spectrum {0, A}."""
    cv = fourier(ws)
    lv = magnitude_levels(cv)
    if lv.kind != "two-level":
        raise HypothesisNotMet("two-level spectrum", f"levels {lv.levels}")
    N = sum(cv.nonzero())
    A2 = lv.nonzero[0]
    g = ws.group
    norm = ws.sq_norm()
    if ws.exact:
        lhs = N * (A2 if isinstance(A2, CycInt) else CycInt.from_int(ws.K, A2))
        rhs = norm * g.order
        ok = lhs == rhs
        if isinstance(A2, int) and (rhs.as_rational_integer() is not None):
            lhs, rhs = N * A2, rhs.as_rational_integer()
    else:
        lhs, rhs = N * A2, g.order * norm
        ok = abs(lhs - rhs) <= 1e-6 * max(1.0, abs(rhs))
    if not ok:
        raise TheoremViolation(f"N A^2 = {lhs} differs from |G| sum|f|^2 = {rhs}")
    lb = g.order / N
    if len(ws) < lb - 1e-9:
        raise TheoremViolation("support smaller than |G|/N")
    return NumerologyReport(N, A2, lhs, rhs, lb)


# structure theorems ---------------------------------------------------------

@dataclass
class Certificate:
    D: frozenset
    H: frozenset
    quotient_order: int
    S_bar: frozenset
    D_bar: frozenset
    cosets: list
    levels: list
    orders: dict = field(default_factory=dict)
    admissible_x: list = field(default_factory=list)
    P2_at_a: object = None
    a: object = None
    advisory: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def s(v):
            return sorted(list(x) for x in v)

        def num(v):
            if isinstance(v, CycInt):
                r = v.as_rational_integer()
                return r if r is not None else {"cyc_k": v.k, "coeffs": list(v.coeffs)}
            if isinstance(v, complex):
                return v.real
            return v

        return {
            "D": s(self.D),
            "H": s(self.H),
            "quotient_order": self.quotient_order,
            "S_bar": s(self.S_bar),
            "D_bar": s(self.D_bar),
            "cosets": [s(c) for c in self.cosets],
            "levels": [num(v) for v in self.levels],
            "orders": {str(list(k)): v for k, v in self.orders.items()},
            "admissible_x": s(self.admissible_x),
            "P2_at_a": num(self.P2_at_a),
            "a": num(self.a),
            "advisory": self.advisory,
        }


def _structure(ws: WeightedSupport):
    g = ws.group
    D = difference(ws.points, ws.points, g)
    H = stabilizer(sumset(D, D, g), g)
    Q = Quotient(g, H)
    Sb = frozenset(Q.pi(p) for p in ws.points)
    Db = frozenset(Q.pi(d) for d in D)
    return g, D, H, Q, Sb, Db


def _require_common_argument(ws: WeightedSupport) -> None:
    if not common_argument(ws.weights):
        raise HypothesisNotMet("common-argument", "weights do not share one argument")


def certify_overconstrained(ws: WeightedSupport) -> Certificate:
    """Two-level common-argument sums: support meets at most two H-cosets."""
    _require_common_argument(ws)
    lv = magnitude_levels(fourier(ws))
    if lv.kind != "two-level":
        raise HypothesisNotMet("two-level spectrum", f"levels {lv.levels}")
    g, D, H, Q, Sb, Db = _structure(ws)
    orders = {d: Q.order_of(d) for d in Db if d != Q.zero}
    cert = Certificate(D, H, Q.order, Sb, Db, [Q.coset(r) for r in sorted(Sb)], lv.levels, orders)
    if len(Sb) > 2:
        raise TheoremViolation(f"|S'| = {len(Sb)} > 2 for a two-level spectrum")
    if not ws.support <= frozenset().union(*cert.cosets):
        raise TheoremViolation("support not covered by the named cosets")
    if len(Sb) == 2 and len(Db) >= 3 and any(o > 2 for o in orders.values()):
        raise TheoremViolation(f"element of order > 2 in D' with |S'| = 2: {orders}")
    return cert


def _poly_from_roots(roots: list, one) -> list:
    """Coefficients c_0..c_d of prod (X - r)."""
    coeffs = [one]
    for r in roots:
        nxt = [one * 0 for _ in range(len(coeffs) + 1)]
        for i, c in enumerate(coeffs):
            nxt[i + 1] = nxt[i + 1] + c
            nxt[i] = nxt[i] - c * r
        coeffs = nxt
    return coeffs


def second_derivative_at(levels: list, a):
    """P''(a) for P(X) = X prod (X - B_j), in the ring of the arguments."""
    one = a * 0 + 1
    B = [b if not isinstance(a, CycInt) or isinstance(b, CycInt) else CycInt.from_int(a.k, b) for b in levels]
    B = [b.embed(a.k) if isinstance(b, CycInt) and isinstance(a, CycInt) else b for b in B]
    c = [one * 0] + _poly_from_roots(B, one)
    total = one * 0
    for kk in range(2, len(c)):
        term = c[kk] * (kk * (kk - 1))
        for _ in range(kk - 2):
            term = term * a
        total = total + term
    return total


def multiples_of_support(S: frozenset, Q: Quotient, start: int = 3) -> frozenset:
    """Union of l*S over all l >= start (empty when S is empty)."""
    if not S:
        return frozenset()
    seen = []
    cur = iterated_sumset(S, start, Q)
    union = set()
    while cur not in seen:
        seen.append(cur)
        union |= cur
        cur = sumset(cur, S, Q)
    return frozenset(union)


def certify_multilevel(ws: WeightedSupport, t: Optional[int] = None) -> Certificate:
    """Multi-level extension; every hypothesis is evaluated and reported."""
    _require_common_argument(ws)
    cv = fourier(ws)
    lv = magnitude_levels(cv)
    if t is not None and lv.t != t:
        raise HypothesisNotMet("level count", f"found {lv.t} nonzero levels, expected {t}")
    if lv.t == 1:
        return certify_overconstrained(ws)
    g, D, H, Q, Sb, Db = _structure(ws)
    mu = ws.as_mapping()
    nu = convolve(mu, reflect_conj(mu, g), g)
    nub = pushforward(nu, Q)
    a = nub[Q.zero]
    rest = frozenset(x for x, v in drop_zeros(nub).items() if x != Q.zero)
    two_D = sumset(Db, Db, Q)
    candidates = sorted(two_D - Db)
    blocked = multiples_of_support(rest, Q)
    admissible = [x for x in candidates if x not in blocked]
    p2 = second_derivative_at(lv.nonzero, a)
    orders = {d: Q.order_of(d) for d in Db if d != Q.zero}
    cert = Certificate(
        D, H, Q.order, Sb, Db, [Q.coset(r) for r in sorted(Sb)], lv.levels, orders,
        admissible, p2, a,
        advisory={"small_difference_set": len(Db) < Q.order / 2},
    )
    if not admissible:
        raise HypothesisNotMet(
            "admissible x",
            f"no x in 2D'\\D' avoids l*supp(nu') for l >= 3 ({len(candidates)} candidates)",
            cert,
        )
    if _is_zero(p2, abs(_as_complex(a)) ** (lv.t + 1) + 1):
        raise HypothesisNotMet("P''(a) != 0", f"P''(a) = 0 at a = {a}; admissible x = {admissible}", cert)
    if len(Sb) > lv.t + 1:
        raise TheoremViolation(f"|S'| = {len(Sb)} > t+1 = {lv.t + 1}")
    return cert
