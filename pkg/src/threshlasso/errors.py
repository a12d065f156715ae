"""Exception types shared across the solver and diagnostic modules."""

from __future__ import annotations


class DegenerateDesignError(RuntimeError):
    """Active-set Gram matrix is numerically singular.

    ``indices`` names the offending column set.
    """

    def __init__(self, indices, message=None):
        self.indices = tuple(int(j) for j in indices)
        super().__init__(message or f"numerically singular active set {self.indices}")


class RankDeficiencyError(ValueError):
    """A least-squares design block is rank deficient; ``indices`` names it."""

    def __init__(self, indices, message=None):
        self.indices = tuple(int(j) for j in indices)
        super().__init__(message or f"rank-deficient column set {self.indices}")


class NonConvergenceError(RuntimeError):
    """An iterative solver ran out of iterations.

    Carries the last optimality measure seen (``residual`` for KKT-style
    checks, ``objective``/``gap`` for LP solves) so callers can decide
    whether the answer is still usable.
    """

    def __init__(self, message, residual=None, objective=None, gap=None):
        self.residual = residual
        self.objective = objective
        self.gap = gap
        super().__init__(message)


class EnumerationBudgetError(ValueError):
    """Exact subset enumeration would exceed the configured budget."""


class InvalidRegimeError(ValueError):
    """Constants requested outside the regime where their formula is valid."""


class PrecisionError(ValueError):
    """An exact (fully enumerated) diagnostic was required but not supplied."""
