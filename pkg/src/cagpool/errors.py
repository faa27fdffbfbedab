"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ValidationError -> 2, NumericalError -> 3.
"""


class CagpoolError(Exception):
    """Base class for all package errors."""


class ValidationError(CagpoolError, ValueError):
    """Bad input: shape mismatch, invalid config, malformed file."""


class NumericalError(CagpoolError, ArithmeticError):
    """Numerical failure: NaN/Inf detected, degenerate values, budget blown."""


class ShapeError(ValidationError):
    """Operand shapes are incompatible for the requested operation."""


class DegenerateCoAttentionError(NumericalError):
    """The co-attention vector norm fell below the safe division threshold."""

    def __init__(self, norm: float):
        super().__init__(f"co-attention vector is degenerate (norm={norm:.3e})")
        self.norm = norm


class BruteForceBoundError(ValidationError):
    """Graph too large for the brute-force isomorphism search."""


class SearchBudgetError(NumericalError):
    """Exact GED search exceeded its node or state budget."""
