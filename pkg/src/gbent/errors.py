"""Exception types shared across the package."""


class RingMismatchError(ValueError):
    """Operands live in different rings Z[zeta_{2^k}]."""


class NotASubringError(ValueError):
    """Requested embedding target is smaller than the source ring."""


class PreconditionError(ValueError):
    """An operation was called outside the domain where it is defined."""


class HypothesisNotMet(Exception):
    """A conditional theorem was asked to certify an instance whose hypotheses fail.

    This is *not* a counterexample: the theorem simply says nothing about the
    instance.  ``failed`` names the hypothesis that did not hold.
    """

    def __init__(self, failed: str, detail: str = "", report=None):
        self.failed = failed
        self.detail = detail
        self.report = report
        super().__init__(f"hypothesis not met: {failed}" + (f" ({detail})" if detail else ""))


class TheoremViolation(AssertionError):
    """An unconditional invariant failed.  Always an implementation bug."""
