"""Exception types shared across the package.

The CLI maps these onto process exit codes: validation problems exit
with 2, I/O problems with 3, and numerical failures (NaN in solver
state) with 4.
"""


class ValidationError(ValueError):
    """A configuration or domain object violates one of its invariants."""


class DimensionError(ValidationError):
    """Array arguments have inconsistent shapes for the requested operation."""


class NumericalError(ArithmeticError):
    """A numerical method produced a non-finite state and cannot continue."""
