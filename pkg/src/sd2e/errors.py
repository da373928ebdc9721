"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ConfigError -> 2, DataError -> 3,
NumericalError -> 4.
"""


class Sd2eError(Exception):
    """Base class for all package errors."""


class BoundsError(Sd2eError):
    """Invalid or degenerate axis bounds."""


class InputError(Sd2eError):
    """Caller passed inconsistent or non-finite inputs."""


class ConfigError(Sd2eError):
    """Bad configuration file or option combination."""


class DataError(Sd2eError):
    """Dataset file is malformed or contains invalid values."""


class NumericalError(Sd2eError):
    """A numerical routine became degenerate or diverged."""


class DegenerateRegressionError(NumericalError):
    """The weight-update denominator is (numerically) zero."""

    def __init__(self, variant: str, value: float):
        self.variant = variant
        self.value = value
        super().__init__(
            f"degenerate weight-update denominator ({variant} variant): {value!r}"
        )


class EmptyRegionError(Sd2eError):
    """A subspace holds too few samples for a local re-exploration."""
