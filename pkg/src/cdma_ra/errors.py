"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: ConfigError -> 1, NumericalError -> 2,
ModelDomainError -> 3.
"""


class CdmaRaError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CdmaRaError, ValueError):
    """Invalid or unparsable configuration."""


class ResourceError(CdmaRaError):
    """A requested computation is too large to run."""


class NumericalError(CdmaRaError, ArithmeticError):
    """A numerical routine failed to converge or underflowed.

    ``bracket`` carries the last root-finding bracket when relevant.
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class ModelDomainError(CdmaRaError, ValueError):
    """The model has no formula for the requested operating point."""


class StabilityError(ModelDomainError):
    """An arrival rate lies outside the stability region."""

    def __init__(self, message, class_index=None, boundary=False):
        super().__init__(message)
        self.class_index = class_index
        self.boundary = boundary
