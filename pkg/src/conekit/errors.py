"""Exception hierarchy shared by the library and the CLI."""


class ConekitError(Exception):
    """Base class for all library errors."""


class ConfigError(ConekitError):
    """Unsupported algebra, malformed run-config, unknown keys."""


class UsageError(ConekitError, ValueError):
    """A caller broke an operation's precondition (algebra mismatch, bad shape...)."""


class DomainError(ConekitError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class ConeMembershipError(ConekitError, ArithmeticError):
    """A simulated quantity left the open cone through rounding."""

    def __init__(self, message, *, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time
