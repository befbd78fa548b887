"""Exception types shared across the package.

The CLI maps :class:`ValidationError` to exit code 2 and
:class:`NumericalError` to exit code 1.
"""


class ValidationError(ValueError):
    """Input violates a documented precondition or file-format invariant."""


class NumericalError(RuntimeError):
    """A numerical routine failed (non-convergence, infeasible budget, ...)."""


class InfeasibleShotCount(NumericalError, OverflowError):
    """Requested shot count does not fit in a signed 64-bit integer."""


class NoBinsAchievable(ValidationError):
    """Parameters leave no admissible bin (e.g. 4*epsilon < 3*eta)."""
