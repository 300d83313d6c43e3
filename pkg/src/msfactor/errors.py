"""Exception hierarchy shared by every module."""


class MSFactorError(Exception):
    """Base class for all msfactor errors."""


class ShapeError(MSFactorError, ValueError):
    """Array shapes are inconsistent with the requested operation."""


class NotHermitianError(MSFactorError, ValueError):
    """A matrix that must be Hermitian is not (no silent symmetrization)."""


class PreconditionError(MSFactorError, ValueError):
    """An operation was called outside its documented domain."""


class DegenerateClosedFormError(PreconditionError):
    """The N_b=2 closed form is undefined; use the generic decomposition."""


class BasisMismatchError(MSFactorError, ValueError):
    """A propagator and a state vector are expressed in different bases."""


class ConfigError(MSFactorError, ValueError):
    """Malformed run configuration. ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class ConvergenceError(MSFactorError, RuntimeError):
    """A numerical procedure failed to reach the requested tolerance.

    ``estimate`` is the best achieved error estimate and ``report`` carries
    any partial result the caller may still want to inspect.
    """

    def __init__(self, message, estimate=None, report=None):
        super().__init__(message)
        self.estimate = estimate
        self.report = report
