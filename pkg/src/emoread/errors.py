"""Exception types shared across the package.

The CLI maps these onto exit codes: DataError -> 3, NumericalError -> 4.
"""


class EmoreadError(Exception):
    """Base class for all package errors."""


class DataError(EmoreadError):
    """Malformed, missing, or inconsistent input data."""


class NumericalError(EmoreadError):
    """Numerical failure (NaN/Inf encountered, divergence, ...)."""
