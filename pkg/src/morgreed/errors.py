"""Exception hierarchy."""


class MorGreedError(Exception):
    """Base class for all package errors."""


class SingularMatrix(MorGreedError):
    pass


class DimensionMismatch(MorGreedError, ValueError):
    pass


class InvalidRange(MorGreedError, ValueError):
    pass


class FrozenEstimator(MorGreedError):
    """Raised when updating a residual estimator after the latch engaged."""


class DuplicateCenters(MorGreedError, ValueError):
    pass


class DegenerateSystem(MorGreedError):
    pass


class NotConverged(MorGreedError):
    pass


class EmptyCoarseSet(MorGreedError):
    pass


class SingularOnGrid(MorGreedError):
    pass


class MissingLog(MorGreedError, FileNotFoundError):
    pass


class FormatError(MorGreedError, ValueError):
    """A file does not follow its declared container schema."""
