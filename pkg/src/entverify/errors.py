"""Exception hierarchy shared by all modules."""


class EntVerifyError(ValueError):
    """Base class for every error raised by this package."""


class NotHermitian(EntVerifyError):
    pass


class NotUnitary(EntVerifyError):
    pass


class DegenerateSpectrum(EntVerifyError):
    pass


class DimensionMismatch(EntVerifyError):
    pass


class InvalidDimension(EntVerifyError):
    pass


class UnsupportedDimension(EntVerifyError):
    pass


class UnbiasednessViolation(EntVerifyError):
    pass


class NotAProjector(EntVerifyError):
    pass


class WeightError(EntVerifyError):
    pass


class LambdaOutOfRange(EntVerifyError):
    pass


class NotOptimalStrategy(EntVerifyError):
    pass


class RateOutOfRange(EntVerifyError):
    pass


class PreconditionError(EntVerifyError):
    pass


class NotConjugateBasisForm(EntVerifyError):
    pass


class DomainError(EntVerifyError):
    pass


class InvalidSchmidt(EntVerifyError):
    pass


class DimensionTooLarge(EntVerifyError):
    pass


class EpsilonOutOfRange(EntVerifyError):
    pass
