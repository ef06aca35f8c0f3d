"""Generalized Boolean functions f: F_2^n -> Z_{2^k} and their Walsh spectra.

Index convention: the integer x encodes the vector whose coordinate i+1 is
bit i of x, so <u, x> = popcount(u & x) mod 2.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .cyclotomic import (
    CycInt,
    abs_sq_array,
    box,
    degree,
    is_level,
    lift_exponents,
    sqrt2_element,
    to_complex_array,
)
from .errors import PreconditionError, TheoremViolation

GBENT = "gbent"
GPLATEAUED = "gplateaued"
LANDSCAPE = "landscape"
NOT_LANDSCAPE = "not-landscape"


def popcount_parity(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64).copy()
    p = np.zeros_like(a)
    while a.any():
        p ^= a & 1
        a >>= 1
    return p


class GBF:
    """Truth table of a function F_2^n -> Z_{2^k}.

    The table is stored as a read-only int64 array of length 2^n.
    """

    __slots__ = ("n", "k", "table")

    def __init__(self, n: int, k: int, table: Sequence[int]):
        if n < 1 or k < 1:
            raise ValueError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
        t = np.array(table, dtype=np.int64).reshape(-1)
        if t.size != 1 << n:
            raise ValueError(f"table has {t.size} entries, expected 2^{n} = {1 << n}")
        if t.size and (t.min() < 0 or t.max() >= 1 << k):
            raise ValueError(f"table values must lie in [0, {1 << k})")
        t.setflags(write=False)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "k", int(k))
        object.__setattr__(self, "table", t)

    def __setattr__(self, name, value):
        raise AttributeError("GBF is immutable")

    @classmethod
    def from_function(cls, n: int, k: int, func: Callable[[int], int]) -> "GBF":
        return cls(n, k, [func(x) % (1 << k) for x in range(1 << n)])

    @classmethod
    def constant(cls, n: int, k: int, c: int = 0) -> "GBF":
        return cls(n, k, [c % (1 << k)] * (1 << n))

    @property
    def size(self) -> int:
        return 1 << self.n

    def __call__(self, x: int) -> int:
        return int(self.table[x])

    def __eq__(self, other) -> bool:
        if not isinstance(other, GBF):
            return NotImplemented
        return self.n == other.n and self.k == other.k and np.array_equal(self.table, other.table)

    def __hash__(self) -> int:
        return hash((self.n, self.k, self.table.tobytes()))

    def __repr__(self) -> str:
        return f"GBF(n={self.n}, k={self.k}, table={self.table.tolist()})"

    def binary_components(self) -> list[np.ndarray]:
        """Boolean coordinates a_0..a_{k-1} with f = sum a_i 2^i."""
        return [(self.table >> i) & 1 for i in range(self.k)]

    # file format ------------------------------------------------------------
    def to_json(self) -> dict:
        return {"n": self.n, "k": self.k, "table": self.table.tolist()}

    @classmethod
    def from_json(cls, d: dict) -> "GBF":
        try:
            n, k, table = int(d["n"]), int(d["k"]), d["table"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed truth-table document: {exc}") from exc
        if not isinstance(table, list) or not all(isinstance(v, int) for v in table):
            raise ValueError("'table' must be a list of integers")
        return cls(n, k, table)

    @classmethod
    def load(cls, path) -> "GBF":
        return cls.from_json(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))


# transforms -----------------------------------------------------------------

def butterfly(a: np.ndarray) -> np.ndarray:
    """In-place Hadamard butterfly along axis -2 (length 2^n)."""
    M = a.shape[-2]
    h = 1
    while h < M:
        v = a.reshape(a.shape[:-2] + (M // (2 * h), 2, h, a.shape[-1]))
        lo = v[..., 0, :, :]
        hi = v[..., 1, :, :]
        s = lo + hi
        hi -= lo
        np.negative(hi, out=hi)
        lo[...] = s
        h *= 2
    return a


def wht_batch(tables: np.ndarray, k: int) -> np.ndarray:
    """Exact WHT of a stack of truth tables.

    ``tables`` has shape (..., 2^n); the result has shape (..., 2^n, N) with
    N = 2^{k-1} coefficients per value.
    """
    tables = np.asarray(tables)
    n = tables.shape[-1].bit_length() - 1
    dtype = np.int64 if n < 60 else object
    a = lift_exponents(tables, k, dtype=dtype)
    return butterfly(a)


def wht_array(f: GBF) -> np.ndarray:
    return wht_batch(f.table, f.k)


def wht(f: GBF) -> list[CycInt]:
    """W(u) = sum_x zeta^{f(x)} (-1)^{<u,x>} for every u, via the butterfly."""
    return box(f.k, wht_array(f))


def wht_naive(f: GBF, u: int) -> CycInt:
    """Direct O(2^n) evaluation of W(u); independent of the butterfly."""
    N = degree(f.k)
    acc = [0] * N
    for x in range(f.size):
        e = int(f.table[x])
        sign = -1 if bin(u & x).count("1") & 1 else 1
        if e >= N:
            e -= N
            sign = -sign
        acc[e] += sign
    return CycInt(f.k, acc)


def squared_spectrum(f: GBF) -> np.ndarray:
    """|W(u)|^2 for all u as an (2^n, N) coefficient array."""
    return abs_sq_array(wht_array(f), bound=f.size)


def rational_squares(sq: np.ndarray) -> Optional[np.ndarray]:
    """Rational-integer values of a squared spectrum, or None if any is irrational."""
    if sq.shape[-1] > 1 and np.any(sq[..., 1:]):
        return None
    return sq[..., 0]


# classification -------------------------------------------------------------

@dataclass
class SpectrumReport:
    n: int
    k: int
    walsh: list[CycInt]
    squared: list[CycInt]
    verdict: str
    s: Optional[int] = None
    levels: frozenset = frozenset()
    has_zero: bool = False
    regular_exponents: Optional[list[Optional[int]]] = None
    notes: list[str] = field(default_factory=list)

    @property
    def squared_int(self) -> list[Optional[int]]:
        return [q.as_rational_integer() for q in self.squared]

    @property
    def magnitudes(self) -> np.ndarray:
        return np.array([abs(w.to_complex()) for w in self.walsh])

    @property
    def distinct_squared(self) -> Counter:
        return Counter(self.squared)

    @property
    def is_landscape(self) -> bool:
        return self.verdict in (GBENT, GPLATEAUED, LANDSCAPE)

    def distinct_magnitudes(self, tol: float = 1e-6) -> list[float]:
        return cluster_values(self.magnitudes, tol)

    def label(self) -> str:
        if self.verdict == GPLATEAUED:
            return f"{self.s}-gplateaued"
        return self.verdict

    def to_dict(self) -> dict:
        spectrum = []
        for u, (w, q) in enumerate(zip(self.walsh, self.squared)):
            z = w.to_complex()
            spectrum.append(
                {
                    "u": u,
                    "walsh": list(w.coeffs),
                    "squared": q.as_rational_integer()
                    if q.as_rational_integer() is not None
                    else list(q.coeffs),
                    "re": z.real,
                    "im": z.imag,
                    "magnitude": abs(z),
                }
            )
        return {
            "n": self.n,
            "k": self.k,
            "verdict": self.label(),
            "s": self.s,
            "levels": sorted([list(l) for l in self.levels]),
            "has_zero": self.has_zero,
            "distinct_squared": len(self.distinct_squared),
            "distinct_magnitudes": len(self.distinct_magnitudes()),
            "regular_exponents": self.regular_exponents,
            "notes": self.notes,
            "spectrum": spectrum,
        }


def cluster_values(values, tol: float) -> list[float]:
    """Distinct values after merging neighbours closer than ``tol``."""
    out: list[float] = []
    for v in sorted(float(x) for x in values):
        if not out or v - out[-1] > tol:
            out.append(v)
    return out


def _pythagorean_hypotenuse(v: int) -> bool:
    # v is a hypotenuse iff it has a prime factor = 1 mod 4
    d = 2
    while d * d <= v:
        while v % d == 0:
            if d % 4 == 1:
                return True
            v //= d
        d += 1
    return v > 1 and v % 4 == 1


def classify(f: GBF) -> SpectrumReport:
    """Exact gbent / s-gplateaued / landscape classification."""
    W = wht_array(f)
    sq = abs_sq_array(W, bound=f.size)
    walsh = box(f.k, W)
    squared = box(f.k, sq)

    total = sq.sum(axis=0)
    if total[0] != 1 << (2 * f.n) or np.any(total[1:]):
        raise TheoremViolation("Parseval identity failed")

    rat = rational_squares(sq)
    report = SpectrumReport(f.n, f.k, walsh, squared, NOT_LANDSCAPE)
    if rat is None:
        return report
    values = [int(v) for v in rat]
    nonzero = sorted(set(v for v in values if v))
    report.has_zero = any(v == 0 for v in values)
    levels = [is_level(v) for v in nonzero]
    if any(l is None for l in levels):
        return report
    report.levels = frozenset(levels)
    if all(v == 1 << f.n for v in values):
        report.verdict = GBENT
        report.s = 0
    elif len(nonzero) == 1 and nonzero[0] & (nonzero[0] - 1) == 0:
        report.verdict = GPLATEAUED
        report.s = nonzero[0].bit_length() - 1 - f.n
    else:
        report.verdict = LANDSCAPE

    exps = []
    for w, v in zip(walsh, values):
        exps.append(phase_exponent(w, v) if v else None)
        if v and f.k == 2:
            m, odd = is_level(v)
            if m % 2 == 1:
                if _pythagorean_hypotenuse(odd):
                    report.notes.append(
                        f"k=2 odd-m level (m={m}, v={odd}) may take the Pythagorean form; not analyzed"
                    )
    report.regular_exponents = exps
    if f.k == 2 and any(e is None for e, v in zip(exps, values) if v):
        report.notes.append("k=2 with odd m: values are 2^{floor(m/2)} v (+-1 +- i); no exponent defined")
    report.notes = sorted(set(report.notes))
    return report


def phase_exponent(value: CycInt, sq: int) -> Optional[int]:
    """Find rho with value = 2^{m/2} v zeta^rho where sq = 2^m v^2.

    For odd m the factor sqrt(2) is realised inside the ring (k >= 3).
    Returns None when no exponent reproduces ``value`` exactly.
    """
    lv = is_level(sq)
    if lv is None:
        return None
    m, v = lv
    k = value.k
    N = degree(k)
    nz = [i for i, c in enumerate(value.coeffs) if c]
    if not nz:
        return None
    if m % 2 == 0:
        t = (1 << (m // 2)) * v
        if len(nz) != 1:
            return None
        i = nz[0]
        c = value.coeffs[i]
        if c == t:
            return i
        if c == -t:
            return i + N
        return None
    if k < 3:
        return None
    base = sqrt2_element(k) * ((1 << (m // 2)) * v)
    first = nz[0]
    two = 1 << k
    for shift in (1 << (k - 3), (1 << (k - 2)) + (1 << (k - 3))):
        for lift in (0, N):
            rho = (first + lift - shift) % two
            if base.mul_zeta(rho) == value:
                return rho
    return None


def dual_exponent(f: GBF, u: int, report: Optional[SpectrumReport] = None) -> Optional[int]:
    """Dual value at u of a gbent f, i.e. rho with W(u) = 2^{n/2} zeta^rho.

    Returns None in the excluded case n odd, k = 2 (no dual exists).
    """
    report = report or classify(f)
    if report.verdict != GBENT:
        raise PreconditionError("dual_exponent needs a gbent function")
    if f.n % 2 == 1 and f.k <= 2:
        return None
    return phase_exponent(report.walsh[u], 1 << f.n)


def dual(f: GBF) -> Optional[GBF]:
    """The dual function of a gbent f, when it is defined."""
    report = classify(f)
    exps = [dual_exponent(f, u, report) for u in range(f.size)]
    if any(e is None for e in exps):
        return None
    return GBF(f.n, f.k, exps)


def is_bent_boolean(table: Sequence[int]) -> bool:
    """Classical Boolean bent test via the integer Walsh transform."""
    t = np.asarray(table, dtype=np.int64)
    n = t.size.bit_length() - 1
    w = (1 - 2 * t)[:, None].copy()
    butterfly(w)
    return bool(np.all(w[:, 0] ** 2 == 1 << n))


def spectrum_magnitudes(f: GBF) -> np.ndarray:
    return np.abs(to_complex_array(wht_array(f)))
