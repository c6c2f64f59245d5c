"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """Raised when an argument violates an operation's precondition."""


class NoSignalError(RuntimeError):
    """Raised when a response or received signal carries no energy.

    Typical causes are an unreachable relay (all-zero composite channel)
    or a statistic requested on an all-zero signal.
    """


class ProbeOverlapError(InvalidArgumentError):
    """Raised when probe windows are too short for the channel memory."""
