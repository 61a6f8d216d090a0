from __future__ import annotations


class InvariantViolation(RuntimeError):
    """An internal consistency check failed (analytic vs oracle, reconstruction, sign checks)."""


class ConvergenceError(ArithmeticError):
    """An iterative routine (Jacobi sweeps, root search) did not converge."""


class HorizonError(ValueError):
    """A reservoir evolution was requested at or beyond the recurrence horizon."""
