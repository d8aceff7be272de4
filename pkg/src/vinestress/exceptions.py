"""Exception types shared across the package."""


class VinestressError(Exception):
    """Base class for all package errors."""


class InputError(VinestressError, ValueError):
    """Invalid input data or arguments (shape, range, format)."""


class DegenerateInputError(InputError):
    """Input is formally valid but statistically degenerate (e.g. constant)."""


class TauDomainError(VinestressError, ValueError):
    """Requested Kendall's tau is not attainable by a copula family/rotation."""


class NumericalError(VinestressError, RuntimeError):
    """An iterative numerical routine failed to converge."""
