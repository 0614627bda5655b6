"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A configuration or argument violates a documented precondition.

    Carries one "field: message" string per problem so callers can report
    every violation at once.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DomainError(ValueError):
    """A scalar argument lies outside the mathematical domain."""


class CoverageError(ValueError):
    """A time lookup falls outside the covered interval."""


class OrderingError(ValueError):
    """An append does not advance the time stamp."""


class SizeError(ValueError):
    """The instance is too large for the requested exact algorithm."""


class NumericFailure(RuntimeError):
    """A run produced numerically unusable output."""

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = dict(payload or {})


class AccuracyError(NumericFailure):
    """An a-priori bound was violated, signalling a step size too large."""


class QuadratureError(NumericFailure):
    """Adaptive quadrature failed to reach the requested tolerance."""


class InternalInconsistency(RuntimeError):
    """A state the calling code proves impossible was reached."""
