"""Exception and warning types shared across the package."""


class TradeoffError(Exception):
    """Base class for every error raised by this package."""


class NotHermitian(TradeoffError):
    def __init__(self, deviation: float):
        self.deviation = float(deviation)
        super().__init__(f"matrix is not Hermitian (max |M - M^dag| = {deviation:.3e})")


class BadDimension(TradeoffError):
    pass


class NotNormalized(TradeoffError):
    pass


class NotDensityMatrix(TradeoffError):
    pass


class DimensionMismatch(TradeoffError):
    pass


class NonRealExpectation(TradeoffError):
    pass


class DegenerateObservable(TradeoffError):
    pass


class NonCommuting(TradeoffError):
    def __init__(self, norm: float):
        self.norm = float(norm)
        super().__init__(f"estimators do not commute (||[A, B]||_F = {norm:.3e})")


class NotPm1Valued(TradeoffError):
    pass


class OutOfDomain(TradeoffError):
    pass


class MeanEstAtBoundary(TradeoffError):
    pass


class OutOfInterval(TradeoffError):
    pass


class PreconditionViolated(TradeoffError):
    pass


class InvalidVectors(TradeoffError):
    pass


class MissingTarget(TradeoffError):
    pass


class SingularAngle(TradeoffError):
    pass


class BranchMismatch(TradeoffError):
    pass


class UnsupportedSide(TradeoffError):
    pass


class ParseError(TradeoffError):
    pass


class ValidationError(TradeoffError):
    pass


class TightnessNotGuaranteed(UserWarning):
    """Emitted when a construction is not known to saturate its relation."""
