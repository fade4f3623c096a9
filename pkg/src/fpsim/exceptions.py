"""Exception hierarchy shared across the package."""


class FPSError(Exception):
    """Base class for all package errors."""


class ConfigError(FPSError, ValueError):
    """Invalid configuration: bad ranges, unknown keys, missing fields.

    ``line`` is the 1-based source line when the value came from a file.
    """

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        prefix = ""
        if path is not None:
            prefix += f"{path}:"
        if line is not None:
            prefix += f"{line}:"
        super().__init__(f"{prefix} {message}" if prefix else message)


class ArtifactError(FPSError):
    """A run artifact is missing or malformed."""


class PipelineOrderError(FPSError, RuntimeError):
    """An agent's daily pipeline step was called out of order."""


class IntegrationError(FPSError, ArithmeticError):
    """The ODE integrator produced a non-finite value."""

    def __init__(self, message, time=None):
        self.time = time
        super().__init__(message)


class BackendError(FPSError):
    """Base class for opinion-backend failures."""

    def __init__(self, message, attempts=0):
        self.attempts = attempts
        super().__init__(message)


class BackendNetworkError(BackendError):
    """The endpoint could not be reached or the connection failed."""


class BackendHTTPError(BackendError):
    """The endpoint answered with a non-success HTTP status."""

    def __init__(self, message, status_code=None, attempts=0):
        self.status_code = status_code
        super().__init__(message, attempts=attempts)


class BackendParseError(BackendError):
    """Replies could not be parsed after every allowed retry."""
