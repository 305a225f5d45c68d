"""Exception hierarchy.

The CLI maps ``DataError`` to exit code 2 and ``NumericError`` to exit code 3.
"""


class EmbStabError(Exception):
    """Base class for all package errors."""


class DataError(EmbStabError, ValueError):
    """Malformed input file, inconsistent shapes or invalid configuration."""


class ShapeMismatchError(DataError):
    pass


class NumericError(EmbStabError, ArithmeticError):
    """A quantity is undefined or a computation produced non-finite values."""


class DegenerateNormalizationError(NumericError):
    """Min-max normalized disagreement with ``d_max == d_min``."""


class ZeroCovarianceError(NumericError):
    """Distance correlation with an all-coincident point cloud."""
