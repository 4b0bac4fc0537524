"""Exception types shared across the package."""


class MvscError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(MvscError):
    """Bad user input: malformed files, inconsistent shapes, illegal config."""


class NumericError(MvscError):
    """Numeric failure: singular systems, failed factorizations."""
