"""Exception hierarchy shared by every module of the package."""


class AdaptedBWError(ValueError):
    """Base class for all input/validation errors raised by this package."""


class NonSymmetric(AdaptedBWError):
    pass


class IndefiniteInput(AdaptedBWError):
    pass


class NotPSD(AdaptedBWError):
    pass


class DimensionMismatch(AdaptedBWError):
    pass


class DimensionNotMultiple(AdaptedBWError):
    pass


class DimensionNotScalar(AdaptedBWError):
    """Raised by operations that only make sense for d = 1."""


class IndexOutOfRange(AdaptedBWError, IndexError):
    pass


class RankExceeded(AdaptedBWError):
    pass


class NonPositiveSigma(AdaptedBWError):
    pass


class SingularInput(AdaptedBWError):
    pass


class TooManyProcesses(AdaptedBWError):
    pass


class NotBlockLowerTriangular(AdaptedBWError):
    pass


class InvalidWeights(AdaptedBWError):
    pass
