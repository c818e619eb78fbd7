"""Exception types raised across the package."""


class CloneqError(Exception):
    """Base class for all package errors."""


class NotSquare(CloneqError, ValueError):
    pass


class NotHermitian(CloneqError, ValueError):
    pass


class DimensionMismatch(CloneqError, ValueError):
    pass


class NotDensityMatrix(CloneqError, ValueError):
    pass


class NotOrthonormal(CloneqError, ValueError):
    pass


class QOutOfRange(CloneqError, ValueError):
    pass


class NotPrime(CloneqError, ValueError):
    pass


class TooManyBases(CloneqError, ValueError):
    pass


class NotUnit(CloneqError, ValueError):
    pass


class ConvergenceWarning(UserWarning):
    """No restart of the basis search met its stopping tolerance.

    The best basis found is still returned; the report carries a flag.
    """
