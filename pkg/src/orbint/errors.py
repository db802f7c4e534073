"""Exceptions shared across the package.

Every failure mode that callers are expected to handle is a named exception;
nothing is signalled by sentinel return values.
"""

from __future__ import annotations


class OrbintError(Exception):
    """Base class for all package-specific errors."""


class InsufficientPrecision(OrbintError):
    """A p-adic operation needed digits that the operand does not carry.

    Raised, for example, when evaluating the additive character on an element
    of valuation -k whose mantissa is known to fewer than k digits.
    """


class MixedPrimes(OrbintError):
    """Two exact values living over different primes were combined."""


class BudgetExceeded(OrbintError):
    """An enumeration would have visited more lattice points than allowed."""

    def __init__(self, needed: int, budget: int, message: str = ""):
        self.needed = needed
        self.budget = budget
        super().__init__(
            message or f"enumeration needs {needed} points, budget is {budget}"
        )


class UnstableRefinement(OrbintError):
    """An integral changed value when every cell was refined one level deeper.

    Indicates that a phase declared coarser levels than it actually oscillates
    at; the declared levels cannot be trusted.
    """


class NotAffine(OrbintError):
    """A phase was claimed affine in a coordinate but fails the affine law."""


class FamilyMismatch(OrbintError):
    """An orbital-integral routine was called with a model of the wrong family."""


class OddPrimeRequired(OrbintError):
    """A family-B routine was called at p = 2, where its phase is undefined."""


class BelowThreshold(OrbintError):
    """A germ comparison was requested at a valuation below the validity range."""


class Mismatch(OrbintError):
    """Two exact values that an identity requires to be equal are not.

    Carries both values so callers can report the discrepancy.
    """

    def __init__(self, left, right, message: str = ""):
        self.left = left
        self.right = right
        super().__init__(message or f"exact values differ: {left} != {right}")


class CellShrinkFailed(OrbintError):
    """A cell-shrinking loop hit its depth guard without stabilizing."""


class ParseError(OrbintError):
    """A JSON document does not satisfy the expected schema."""
