"""
Exception hierarchy shared by every subpackage.

Each error also derives from the builtin a caller would naturally catch
(``ValueError`` for bad input, ``RuntimeError`` for resource limits).
"""

from typing import List, Optional


class WeightedPressureError(Exception):
    """Root of all library errors."""


class DimensionMismatchError(WeightedPressureError, ValueError):
    """Windows, patterns or systems of different lattice dimension were combined."""


class WindowError(WeightedPressureError, ValueError):
    """A window does not contain the points an operation needs."""


class EnumerationBudgetError(WeightedPressureError, RuntimeError):
    """Pattern enumeration would exceed the configured budget."""

    def __init__(self, bound: int, budget: int, what: str = "patterns"):
        self.bound = bound
        self.budget = budget
        super().__init__(f"enumeration of {what} needs up to {bound} rows, budget is {budget}")


class SchemeCompatibilityError(WeightedPressureError, ValueError):
    """Cylinder windows do not satisfy E_i ⊇ E_{i+1} ⊕ D_i."""


class EmptyFiberError(WeightedPressureError, ValueError):
    """A cylinder at some level has no preimage cylinder below it."""


class EmptyCylinderError(WeightedPressureError, ValueError):
    """A cylinder has no admissible extension to the potential's window."""


class ExponentRangeError(WeightedPressureError, ValueError):
    """An exponent a_i lies outside [0, 1]."""


class MeasureError(WeightedPressureError, ValueError):
    """Invalid measure parameters or support outside the subshift."""


class FamilyMismatchError(WeightedPressureError, ValueError):
    """Optimizer family cannot live on the given system."""


class OracleInputError(WeightedPressureError, ValueError):
    """Oracle preconditions violated."""


class ConfigError(WeightedPressureError, ValueError):
    """Instance configuration failed to parse or validate."""

    def __init__(self, message: str, diagnostics: Optional[List[str]] = None):
        self.diagnostics = diagnostics or []
        detail = "\n".join(f"  {d}" for d in self.diagnostics)
        super().__init__(f"{message}\n{detail}" if detail else message)
