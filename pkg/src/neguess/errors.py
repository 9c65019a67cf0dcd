"""Exception types raised by neguess."""

from __future__ import annotations


class NEGuessError(Exception):
    """Base class for all library errors."""


class DomainError(NEGuessError, ValueError):
    """An argument lies outside the domain of the requested quantity."""


class NonPositiveWeight(DomainError):
    pass


class EmptyAlphabet(DomainError):
    pass


class DuplicateLabel(DomainError):
    pass


class UnknownLabel(DomainError, KeyError):
    pass


class NonPositiveOrder(DomainError):
    pass


class DegenerateParameters(DomainError):
    pass


class AlphabetMismatch(DomainError):
    pass


class ZeroQ(DomainError):
    pass


class NonPositiveQ(DomainError):
    pass


class InvalidConfig(DomainError):
    pass


class BudgetExceeded(DomainError):
    pass


class DimensionTooLarge(DomainError):
    pass


class NonConvergence(NEGuessError):
    """The minimax solver stopped before meeting its tolerance."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NumericalInconsistency(NEGuessError, ArithmeticError):
    """Two algebraically equal evaluation routes disagreed beyond tolerance."""
