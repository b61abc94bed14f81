"""Exception hierarchy shared by all eigenflow modules."""


class EigenflowError(Exception):
    """Base class for all package errors."""


class UnknownKind(EigenflowError):
    pass


class InvalidParams(EigenflowError):
    pass


class InvalidInit(EigenflowError):
    pass


class CollidingState(EigenflowError):
    pass


class NonFinite(EigenflowError):
    pass


class MaxSubstepsExceeded(EigenflowError):
    pass


class MismatchedModels(EigenflowError):
    pass


class GridMismatch(EigenflowError):
    pass


class TooLarge(EigenflowError):
    pass


class NoConvergence(EigenflowError):
    pass


class DegreeMissing(EigenflowError):
    pass


class DegreeOverflow(EigenflowError):
    pass


class NoNoiseRecorded(EigenflowError):
    pass


class NotPSD(EigenflowError):
    pass


class TooFewSamples(EigenflowError):
    pass


class BadScale(EigenflowError):
    pass


class MissingInput(EigenflowError):
    pass


class ConfigError(EigenflowError):
    def __init__(self, field, message=""):
        self.field = field
        super().__init__(f"{field}: {message}" if message else field)
