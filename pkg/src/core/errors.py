class DivisionByZeroVal(ZeroDivisionError):
    """Raised when a jet with zero value part is inverted."""


class NonConvergent(RuntimeError):
    """Raised when the multiple-reflection series cannot converge."""


class SingularDenominator(ZeroDivisionError):
    """Raised at a pole of the closed-form reflected amplitude."""


class UnsupportedRegime(ValueError):
    """Raised when a formula is used outside the regime it was derived for."""


class NoCoolingPoint(RuntimeError):
    """Raised when the friction coefficient is non-positive over the whole window."""


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class RegimeError(RuntimeError):
    """Front-end wrapper for regime failures surfaced by the physics core."""


class ExportFailure(OSError):
    """Raised when a result file cannot be written."""
