"""Exception types shared across the package."""


class MalabError(Exception):
    """Base class for all errors raised by malab."""


class UnsupportedModelError(MalabError, ValueError):
    """Requested algebra, pair or model is outside the supported desk-scale range."""


class NumericalDegeneracyError(MalabError, ArithmeticError):
    """A linear-algebra step lost rank or became too ill-conditioned to trust."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ChartError(MalabError, ValueError):
    """A point or finite-difference stencil leaves the chart domain."""


class UsageError(MalabError, ValueError):
    """Invalid combination of arguments (e.g. exhaustion kind vs. model type)."""


class CertificateFailure(MalabError, AssertionError):
    """A verification check failed; carries the offending residuals."""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = details or {}


class PremiseViolation(MalabError, ValueError):
    """Input violates the setup a computation relies on (e.g. a deformation
    that is not holomorphic along the Monge-Ampère leaves)."""
