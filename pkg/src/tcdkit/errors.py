"""Exception hierarchy. Every error raised by tcdkit derives from TcdError."""


class TcdError(Exception):
    """Base class for tcdkit errors."""


class DomainError(TcdError, ValueError):
    """An argument lies outside the domain of a function."""


class ConfigError(TcdError, ValueError):
    """Invalid configuration or input data."""


class NumericalError(TcdError, ArithmeticError):
    """A numerical routine failed to converge or produced an undefined result."""


class UsageError(TcdError, RuntimeError):
    """An object was used outside its protocol, e.g. stepping a stopped detector."""


class FileError(TcdError, OSError):
    """A file could not be read or written."""
