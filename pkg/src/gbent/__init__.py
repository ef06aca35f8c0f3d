"""Exact spectral analysis of generalized Boolean functions F_2^n -> Z_{2^k}."""
from .cyclotomic import CycInt, abs_sq, as_rational_integer, conj, cyc_add, cyc_mul, embed, is_level, sqrt2_element
from .errors import HypothesisNotMet, NotASubringError, PreconditionError, RingMismatchError, TheoremViolation
from .gbf import GBF, SpectrumReport, classify, dual, dual_exponent, wht, wht_naive

__all__ = [
    "CycInt",
    "GBF",
    "HypothesisNotMet",
    "NotASubringError",
    "PreconditionError",
    "RingMismatchError",
    "SpectrumReport",
    "TheoremViolation",
    "abs_sq",
    "as_rational_integer",
    "classify",
    "conj",
    "cyc_add",
    "cyc_mul",
    "dual",
    "dual_exponent",
    "embed",
    "is_level",
    "sqrt2_element",
    "wht",
    "wht_naive",
]
