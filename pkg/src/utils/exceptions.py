"""
Exception hierarchy for the verification engine.

Checkers report failing identities as residuals; exceptions are reserved for
malformed input and violated preconditions.
"""

from typing import Any, List, Optional, Tuple


class QGroupoidError(Exception):
    """Base class for all engine errors."""


class StructureError(QGroupoidError, ValueError):
    """Operands do not share a variable list, arity or slot layout."""


class NotInvertibleError(QGroupoidError, ArithmeticError):
    """A truncated series whose leading coefficient is not the unit."""


class ZeroDenominatorError(QGroupoidError, ZeroDivisionError):
    """A rational function with an identically zero denominator."""


class InvalidStructureError(QGroupoidError, ValueError):
    """Structure constants violating antisymmetry or the Jacobi identity."""


class PreconditionError(QGroupoidError):
    """An operation was called on input that fails its precondition.

    The offending residual (if any) is kept on the exception so that callers
    can report it exactly.
    """

    def __init__(self, message: str, residual: Optional[Any] = None):
        super().__init__(message)
        self.residual = residual


class PoissonJacobiError(PreconditionError):
    """A bracket table whose Jacobiator does not vanish."""


class ClassicalLimitError(QGroupoidError):
    """A first-order coefficient that is not of the expected tensor type."""


class ScenarioParseError(QGroupoidError):
    """Scenario text rejected; carries every issue found with its line."""

    def __init__(self, issues: List[Tuple[int, str]]):
        self.issues = list(issues)
        summary = "; ".join(f"line {line}: {message}" for line, message in self.issues)
        super().__init__(summary or "invalid scenario")
