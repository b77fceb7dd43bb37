"""Exception hierarchy shared by the library and the command line."""


class SpecclassError(Exception):
    """Base class for every error raised by this package."""


class DataError(SpecclassError, ValueError):
    """Invalid, missing or inconsistent input data."""


class NumericError(SpecclassError, ArithmeticError):
    """A numerical procedure failed (non-convergence, singular matrix)."""
