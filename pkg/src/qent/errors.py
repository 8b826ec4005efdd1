"""Exception hierarchy.

All errors derive from :class:`QentError` (itself a ``ValueError``) so callers
can catch the family or a single condition.
"""


class QentError(ValueError):
    """Base class for all package errors."""


class DimensionMismatch(QentError):
    pass


class NotHermitian(QentError):
    def __init__(self, deviation):
        self.deviation = float(deviation)
        super().__init__(f"matrix is not Hermitian: max |A - A^H| = {self.deviation:.3e}")


class TraceNotOne(QentError):
    def __init__(self, trace):
        self.trace = complex(trace)
        super().__init__(f"trace must be 1, got {self.trace.real:.12g}"
                         + (f"{self.trace.imag:+.3e}i" if self.trace.imag else ""))


class NotPositive(QentError):
    def __init__(self, eigenvalue):
        self.eigenvalue = float(eigenvalue)
        super().__init__(f"matrix has negative eigenvalue {self.eigenvalue:.12g}")


class NoConvergence(QentError):
    pass


class SpreadTooLarge(QentError):
    def __init__(self, spread, limit):
        self.spread = float(spread)
        super().__init__(f"node spread {self.spread:.6g} exceeds overflow guard {limit:g}")


class NotNormalized(QentError):
    def __init__(self, total):
        self.total = float(total)
        super().__init__(f"probabilities sum to {self.total:.12g}, expected 1")


class NearPure(QentError):
    """A spectrum weight is below the solver floor; the multiplier diverges."""

    def __init__(self, smallest, floor, hint=None):
        self.smallest = float(smallest)
        self.floor = float(floor)
        msg = (f"smallest eigenvalue {self.smallest:.3e} is below {self.floor:.1e}; "
               "the max-entropy multiplier has no finite solution")
        if hint:
            msg += f" ({hint})"
        super().__init__(msg)


class MaxIterationsExceeded(QentError):
    def __init__(self, report):
        self.report = report
        super().__init__(f"solver stopped after {report.iterations} iterations "
                         f"with gradient norm {report.gradient_norm:.3e}")


class ToleranceNotReached(QentError):
    pass
