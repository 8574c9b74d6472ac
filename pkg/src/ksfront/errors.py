"""Exception hierarchy shared by every ksfront module."""


class KsfrontError(Exception):
    """Base class for all library errors."""


# audio
class MissingFileError(KsfrontError, FileNotFoundError):
    pass


class MalformedHeaderError(KsfrontError, ValueError):
    pass


class UnsupportedFormatError(KsfrontError, ValueError):
    pass


class MissingRateError(KsfrontError, ValueError):
    pass


class EmptyInputError(KsfrontError, ValueError):
    pass


# dsp
class TooShortError(KsfrontError, ValueError):
    pass


class DegenerateLengthError(KsfrontError, ValueError):
    pass


class NotPowerOfTwoError(KsfrontError, ValueError):
    pass


# features
class NegativeFrequencyError(KsfrontError, ValueError):
    pass


class NegativeMelError(KsfrontError, ValueError):
    pass


class RaggedInputError(KsfrontError, ValueError):
    pass


class WrongKindError(KsfrontError, ValueError):
    pass


class BadBandError(KsfrontError, ValueError):
    pass


class TooManyFiltersError(KsfrontError, ValueError):
    pass


class DimensionMismatchError(KsfrontError, ValueError):
    pass


class TooManyCepsError(KsfrontError, ValueError):
    pass


# augment
class MaskOutOfRangeError(KsfrontError, ValueError):
    pass


# text
class UnbalancedParensError(KsfrontError, ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class InvalidSequenceError(KsfrontError, ValueError):
    pass


class EmptyCorpusError(KsfrontError, ValueError):
    pass


# attention
class ShapeMismatchError(KsfrontError, ValueError):
    pass


class BadAlignmentError(KsfrontError, ValueError):
    pass


class IndivisibleHeadsError(KsfrontError, ValueError):
    pass


class InputTooSmallError(KsfrontError, ValueError):
    pass


# decode
class SourceFailureError(KsfrontError, RuntimeError):
    pass


class ZeroBeamError(KsfrontError, ValueError):
    pass


class NegativeProbabilityError(KsfrontError, ValueError):
    pass


# schedules
class IdOutOfRangeError(KsfrontError, ValueError):
    pass


# metrics
class EmptyReferenceError(KsfrontError, ValueError):
    def __init__(self, message, index=None):
        if index is not None:
            message = f"{message} (utterance {index})"
        super().__init__(message)
        self.index = index


# containers
class KsfmFormatError(KsfrontError, ValueError):
    pass
