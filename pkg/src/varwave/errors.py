"""Error types shared across the package.

ValidationError maps to CLI exit code 2, NumericalError to exit code 3.
"""


class ValidationError(ValueError):
    """Bad configuration, inconsistent inputs, or violated preconditions."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (non-convergence, positivity loss, blow-up)."""
