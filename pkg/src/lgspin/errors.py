"""Exception hierarchy shared by the library and the CLI."""


class LGSpinError(Exception):
    """Base class for all errors raised by lgspin."""


class DomainError(LGSpinError, ValueError):
    """A parameter lies outside its allowed domain (j, m, lambda, v, x, ...)."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DimensionOverflowError(LGSpinError):
    """Requested spin exceeds the configured maximum."""


class NumericalDegeneracyError(LGSpinError):
    """A constructed operator failed its numerical self-check."""


class ClosedFormUnavailable(LGSpinError):
    """No closed-form expression exists for the requested parameters."""
