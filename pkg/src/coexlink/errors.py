"""Exception types shared across the package."""


class CoexlinkError(Exception):
    """Base class for all package errors."""


class ConfigurationError(CoexlinkError):
    """Invalid or unsupported configuration (bad QAM order, bad geometry, ...)."""


class InputError(CoexlinkError):
    """Invalid runtime input (non-finite symbol, negative power, empty block)."""


class NumericalAccuracyError(CoexlinkError):
    """A numerical routine could not reach the requested tolerance.

    Carries the achieved error estimate so callers can decide whether the
    result is still usable.
    """

    def __init__(self, message: str, achieved: float, requested: float):
        super().__init__(f"{message} (achieved {achieved:.3g}, requested {requested:.3g})")
        self.achieved = achieved
        self.requested = requested


class ContractViolationError(CoexlinkError):
    """An operation was invoked outside its authorized state (e.g. reconstruction without CRC pass)."""


class UsageError(CoexlinkError):
    """Bad command line or config file usage."""
