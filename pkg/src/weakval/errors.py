"""Exception hierarchy.

Domain errors (bad inputs, degenerate selections) derive from
:class:`DomainError`; broken internal identities raise
:class:`InvariantViolation`. The CLI maps the first to exit code 3 and the
second to exit code 4.
"""


class WeakValError(Exception):
    """Base class for all package errors."""


class DomainError(WeakValError, ValueError):
    """Input lies outside the mathematical domain of an operation."""


class NotHermitian(DomainError):
    pass


class NegativeEigenvalue(DomainError):
    pass


class OrthogonalSelection(DomainError):
    """Pre- and post-selected states are (numerically) orthogonal."""


class GridTooCoarse(DomainError):
    pass


class NotOrthogonal(DomainError):
    pass


class IndexOutOfRange(DomainError, IndexError):
    pass


class DimensionMismatch(DomainError):
    pass


class NotTracePreserving(DomainError):
    pass


class WrongKrausCount(DomainError):
    pass


class ExceptionalPoint(DomainError):
    pass


class SingularR(DomainError):
    pass


class ZeroOverlap(DomainError):
    pass


class NotNormalized(DomainError):
    pass


class InvariantViolation(WeakValError, AssertionError):
    """A relation that must hold by construction was found broken."""

    def __init__(self, name: str, detail: str = ""):
        self.name = name
        super().__init__(f"{name}: {detail}" if detail else name)
