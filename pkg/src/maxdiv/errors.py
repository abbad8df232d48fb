"""Exception hierarchy.

Every input problem raises a subclass of :class:`ValidationError`, which the
CLI maps to exit code 2.  :class:`ComponentTooLarge` maps to exit code 3.
"""


class MaxDivError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(MaxDivError, ValueError):
    """Input violates a documented invariant."""


class NonSquare(ValidationError):
    pass


class AsymmetryBeyondTol(ValidationError):
    pass


class EntryOutOfRange(ValidationError):
    pass


class BadDiagonal(ValidationError):
    pass


class NotReflexive(ValidationError):
    pass


class NotSymmetric(ValidationError):
    pass


class NotUltrametric(ValidationError):
    pass


class EmptySubset(ValidationError):
    pass


class IndexOutOfBounds(ValidationError):
    pass


class ZeroMassOnSubset(ValidationError):
    pass


class InvalidDistribution(ValidationError):
    pass


class InvalidOrder(ValidationError):
    pass


class NonPositiveValue(ValidationError):
    pass


class BadWeights(ValidationError):
    pass


class DimensionTooLarge(ValidationError):
    pass


class NotAGraphMatrix(ValidationError):
    pass


class ComponentTooLarge(MaxDivError):
    """An exhaustive search would exceed the configured subset budget."""
