"""Exact arithmetic in Z[zeta_{2^k}].

Elements are stored in the power basis 1, z, ..., z^{N-1} with N = 2^{k-1},
reduced by the relation z^N = -1.  Besides the scalar :class:`CycInt`, the
module exposes batched helpers that work on integer arrays whose last axis is
the coefficient axis; the transforms in :mod:`gbent.gbf` and
:mod:`gbent.adic` run on those and only box results into ``CycInt`` at the
edges.
"""
from __future__ import annotations

import cmath
import math
from math import isqrt
from typing import Iterable, Optional, Sequence

import mpmath
import numpy as np

from .errors import NotASubringError, PreconditionError, RingMismatchError

MAX_K = 16

# int64 is exact as long as every intermediate stays below this
_INT64_SAFE = 1 << 62


def degree(k: int) -> int:
    """Length of the power basis of Z[zeta_{2^k}]."""
    return 1 << (k - 1) if k >= 1 else 1


def _check_k(k: int) -> None:
    if not (1 <= k <= MAX_K):
        raise ValueError(f"ring exponent k={k} outside supported range 1..{MAX_K}")


def _reduce(k: int, poly: Iterable[int]) -> tuple[int, ...]:
    """Fold an arbitrary-length polynomial in z modulo z^N + 1."""
    N = degree(k)
    out = [0] * N
    for i, c in enumerate(poly):
        if not c:
            continue
        q, r = divmod(i, N)
        out[r] += -c if q & 1 else c
    return tuple(out)


class CycInt:
    """Immutable element of Z[zeta_{2^k}].

    >>> i = CycInt.zeta(2)
    >>> i * i
    CycInt(k=2, coeffs=(-1, 0))
    """

    __slots__ = ("k", "coeffs", "_hash")

    def __init__(self, k: int, coeffs: Sequence[int]):
        _check_k(k)
        coeffs = tuple(int(c) for c in coeffs)
        if len(coeffs) != degree(k):
            raise ValueError(
                f"expected {degree(k)} coefficients for k={k}, got {len(coeffs)}"
            )
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("CycInt is immutable")

    # constructors ---------------------------------------------------------
    @classmethod
    def from_poly(cls, k: int, poly: Iterable[int]) -> "CycInt":
        _check_k(k)
        return cls(k, _reduce(k, poly))

    @classmethod
    def from_int(cls, k: int, n: int) -> "CycInt":
        N = degree(k)
        return cls(k, (int(n),) + (0,) * (N - 1))

    @classmethod
    def zero(cls, k: int) -> "CycInt":
        return cls.from_int(k, 0)

    @classmethod
    def one(cls, k: int) -> "CycInt":
        return cls.from_int(k, 1)

    @classmethod
    def zeta(cls, k: int, e: int = 1) -> "CycInt":
        """zeta_{2^k}^e for any integer e."""
        _check_k(k)
        N = degree(k)
        e %= 2 * N
        c = [0] * N
        if e < N:
            c[e] = 1
        else:
            c[e - N] = -1
        return cls(k, c)

    @classmethod
    def from_array(cls, k: int, arr) -> "CycInt":
        return cls(k, [int(v) for v in arr])

    # ring operations ------------------------------------------------------
    def _coerce(self, other) -> "CycInt":
        if isinstance(other, CycInt):
            if other.k != self.k:
                raise RingMismatchError(f"k={self.k} vs k={other.k}")
            return other
        if isinstance(other, (int, np.integer)):
            return CycInt.from_int(self.k, int(other))
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CycInt(self.k, [a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return CycInt(self.k, [-a for a in self.coeffs])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return CycInt(self.k, [a - b for a, b in zip(self.coeffs, o.coeffs)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            m = int(other)
            return CycInt(self.k, [m * a for a in self.coeffs])
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        N = degree(self.k)
        out = [0] * N
        a, b = self.coeffs, o.coeffs
        for i, ai in enumerate(a):
            if not ai:
                continue
            for j, bj in enumerate(b):
                if not bj:
                    continue
                t = i + j
                if t < N:
                    out[t] += ai * bj
                else:
                    out[t - N] -= ai * bj
        return CycInt(self.k, out)

    __rmul__ = __mul__

    def mul_zeta(self, e: int) -> "CycInt":
        """Multiply by zeta^e; a signed rotation of the coefficients."""
        N = degree(self.k)
        e %= 2 * N
        out = [0] * N
        for i, c in enumerate(self.coeffs):
            t = i + e
            q, r = divmod(t, N)
            out[r] = -c if q & 1 else c
        return CycInt(self.k, out)

    def conj(self) -> "CycInt":
        N = degree(self.k)
        c = self.coeffs
        out = [0] * N
        out[0] = c[0]
        for i in range(1, N):
            out[N - i] = -c[i]
        return CycInt(self.k, out)

    def abs_sq(self) -> "CycInt":
        return self * self.conj()

    def embed(self, k_target: int) -> "CycInt":
        if k_target < self.k:
            raise NotASubringError(f"cannot embed k={self.k} into k={k_target}")
        step = 1 << (k_target - self.k)
        out = [0] * degree(k_target)
        for i, c in enumerate(self.coeffs):
            out[i * step] = c
        return CycInt(k_target, out)

    # predicates / readouts --------------------------------------------------
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_real(self) -> bool:
        return self.conj() == self

    def as_rational_integer(self) -> Optional[int]:
        if any(self.coeffs[1:]):
            return None
        return self.coeffs[0]

    def to_complex(self) -> complex:
        N = degree(self.k)
        z = cmath.exp(1j * math.pi / N)
        return complex(sum(c * z**i for i, c in enumerate(self.coeffs) if c))

    def to_mpc(self, dps: int = 60):
        with mpmath.workdps(dps):
            N = degree(self.k)
            z = mpmath.expjpi(mpmath.mpf(1) / N)
            return mpmath.fsum(c * z**i for i, c in enumerate(self.coeffs) if c)

    def __abs__(self) -> float:
        return abs(self.to_complex())

    def __eq__(self, other) -> bool:
        if isinstance(other, CycInt):
            return self.k == other.k and self.coeffs == other.coeffs
        if isinstance(other, (int, np.integer)):
            return self.as_rational_integer() == int(other)
        return NotImplemented

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            r = self.as_rational_integer()
            h = hash(r) if r is not None else hash((self.k, self.coeffs))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self) -> str:
        return f"CycInt(k={self.k}, coeffs={self.coeffs})"

    def __str__(self) -> str:
        terms = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            if i == 0:
                terms.append(str(c))
            else:
                mono = "z" if i == 1 else f"z^{i}"
                terms.append(mono if c == 1 else ("-" + mono if c == -1 else f"{c}*{mono}"))
        return " + ".join(terms).replace("+ -", "- ") if terms else "0"

    def to_json(self) -> dict:
        return {"cyc_k": self.k, "coeffs": list(self.coeffs)}

    @classmethod
    def from_json(cls, d: dict) -> "CycInt":
        return cls(int(d["cyc_k"]), d["coeffs"])


# functional spellings ------------------------------------------------------

def cyc_add(a: CycInt, b: CycInt) -> CycInt:
    return a + b


def cyc_mul(a: CycInt, b: CycInt) -> CycInt:
    return a * b


def embed(a: CycInt, k_target: int) -> CycInt:
    return a.embed(k_target)


def conj(a: CycInt) -> CycInt:
    return a.conj()


def abs_sq(a: CycInt) -> CycInt:
    return a.abs_sq()


def as_rational_integer(a: CycInt) -> Optional[int]:
    return a.as_rational_integer()


def is_level(sq: int) -> Optional[tuple[int, int]]:
    """Write ``sq = 2^m * v^2`` with v odd, or return None.

    Zero is not a level; callers treat it as the zero value of the spectrum.
    """
    sq = int(sq)
    if sq < 0:
        raise PreconditionError("squared magnitude must be non-negative")
    if sq == 0:
        return None
    m = (sq & -sq).bit_length() - 1
    odd = sq >> m
    v = isqrt(odd)
    if v * v != odd:
        return None
    return m, v


def sqrt2_element(k: int) -> CycInt:
    """sqrt(2) = z^{2^{k-3}} - z^{2^{k-2} + 2^{k-3}} in Z[zeta_{2^k}], k >= 3."""
    if k < 3:
        raise PreconditionError("sqrt(2) lies in Z[zeta_{2^k}] only for k >= 3")
    e = 1 << (k - 3)
    return CycInt.zeta(k, e) - CycInt.zeta(k, (1 << (k - 2)) + e)


def real_sign(a: CycInt, tol: float = 1e-9) -> int:
    """Sign of a real element (a == conj(a)); escalates precision near zero."""
    if a.is_zero():
        return 0
    v = a.to_complex().real
    if abs(v) > tol:
        return 1 if v > 0 else -1
    for dps in (50, 200, 800):
        w = mpmath.re(a.to_mpc(dps))
        with mpmath.workdps(dps):
            if abs(w) > mpmath.mpf(10) ** (-(dps // 2)):
                return 1 if w > 0 else -1
    raise ArithmeticError(f"could not decide the sign of {a!r}")


# batched array helpers ----------------------------------------------------

def _dtype_for(bits: int):
    return np.int64 if bits < 62 else object


def lift_exponents(exps: np.ndarray, k: int, dtype=np.int64) -> np.ndarray:
    """Map an integer array of exponents e to coefficient arrays of zeta^e.

    Output has shape ``exps.shape + (N,)`` and a single +-1 per row.
    """
    N = degree(k)
    e = np.asarray(exps, dtype=np.int64) % (2 * N)
    out = np.zeros(e.shape + (N,), dtype=dtype)
    sign = np.where(e < N, 1, -1)
    np.put_along_axis(out, (e % N)[..., None], sign[..., None].astype(dtype), axis=-1)
    return out


def conj_array(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    out[..., 0] = a[..., 0]
    out[..., 1:] = -a[..., :0:-1]
    return out


def mul_array(a: np.ndarray, b: np.ndarray, bound: Optional[int] = None) -> np.ndarray:
    """Negacyclic product of coefficient arrays (broadcast over leading axes).

    ``bound`` is an upper bound on every |coefficient| of a and b; when the
    worst-case accumulated value could leave int64 the product is done on
    Python integers instead.
    """
    N = a.shape[-1]
    if bound is None:
        bound = max(int(np.abs(a).max(initial=0)), int(np.abs(b).max(initial=0)))
    bits = 2 * max(bound, 1).bit_length() + N.bit_length() + 1
    dt = _dtype_for(bits)
    a = a.astype(dt, copy=False)
    b = b.astype(dt, copy=False)
    shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1])
    full = np.zeros(shape + (2 * N,), dtype=dt)
    for i in range(N):
        col = a[..., i : i + 1]
        if dt is np.int64 and not col.any():
            continue
        full[..., i : i + N] += col * b
    return full[..., :N] - full[..., N:]


def abs_sq_array(a: np.ndarray, bound: Optional[int] = None) -> np.ndarray:
    return mul_array(a, conj_array(a), bound)


def embed_array(a: np.ndarray, k_from: int, k_to: int) -> np.ndarray:
    if k_to < k_from:
        raise NotASubringError(f"cannot embed k={k_from} into k={k_to}")
    step = 1 << (k_to - k_from)
    out = np.zeros(a.shape[:-1] + (degree(k_to),), dtype=a.dtype)
    out[..., ::step] = a
    return out


def to_complex_array(a: np.ndarray) -> np.ndarray:
    N = a.shape[-1]
    z = np.exp(1j * np.pi * np.arange(N) / N)
    return np.asarray(a, dtype=np.float64) @ z


def box(k: int, arr: np.ndarray) -> list[CycInt]:
    """Convert an (M, N) coefficient array into a list of CycInt."""
    return [CycInt(k, row.tolist()) for row in np.asarray(arr).reshape(-1, degree(k))]
