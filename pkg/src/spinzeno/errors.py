"""Exception types shared by all modules.

The CLI maps these onto exit codes: configuration errors exit 2,
capacity errors exit 3, numerical failures exit 4.
"""


class SpinzenoError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SpinzenoError):
    """Invalid model parameters, config files, or operator wiring."""


class CapacityError(SpinzenoError):
    """Requested system exceeds the configured memory/size budget."""


class NumericalFailure(SpinzenoError):
    """A numerical routine produced non-finite or non-convergent results."""
