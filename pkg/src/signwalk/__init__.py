"""Greedy signed-sum approximation of reals by moment sequences, with
certified arbitrary-precision arithmetic."""

from .exactnum import (Comparison, DomainError, PrecisionExhaustedError,
                       PrecisionInterval, Rational, TargetExpr)
from .moments import SequenceSpec, cantor_moments, diff, term
from .greedy import GreedyRun, GreedyTrace, error_at, first_crossing, run

__all__ = [
    "Comparison", "DomainError", "PrecisionExhaustedError",
    "PrecisionInterval", "Rational", "TargetExpr",
    "SequenceSpec", "cantor_moments", "diff", "term",
    "GreedyRun", "GreedyTrace", "error_at", "first_crossing", "run",
]

__version__ = "0.1.0"
