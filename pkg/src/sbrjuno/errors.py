"""Exception hierarchy shared by every module."""


class BrjunoError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(BrjunoError, ValueError):
    """An argument lies outside the domain of the operation."""


class RationalInputError(DomainError):
    """The point is rational (terminating expansion); B_sigma is +inf there."""


class QuotientCapError(BrjunoError):
    """A partial quotient exceeded the cap; the seed is effectively rational."""


class SpecError(BrjunoError, ValueError):
    """Malformed or inconsistent continued-fraction description."""


class PrecisionExhaustedError(BrjunoError):
    """A float-seeded expansion lost its digits before the requested depth."""


class PreconditionError(BrjunoError):
    """A documented precondition of a verification routine does not hold."""


class InsufficientDecayError(BrjunoError):
    """Scaling data fell below the resolution of the evaluator."""
