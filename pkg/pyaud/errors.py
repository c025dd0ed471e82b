# encoding: utf-8

__all__ = [
    "AudError",
    "ConfigError",
    "ManifestError",
    "NotFound",
    "UnsupportedFormat",
    "CorruptFile",
    "TooShort",
    "OutOfRange",
    "EmptySequence",
    "DimensionMismatch",
    "UnknownCluster",
    "SegmentTooShort",
    "InfeasibleAlignment",
    "UnknownLabel",
    "EmptyInput",
    "InconsistentAlignment",
    "NoUsableClusters",
    "EmptyCorpus",
    "TargetExceedsKinds",
    "MissingOccurrence",
    "UnknownUnit",
    "LengthMismatch",
    "EmptyTranscriptions",
]


class AudError(Exception):
    """Base class of every error raised by pyaud.

    ``category`` is the machine readable name printed by the command line
    tool when the error escapes.
    """

    category = "AudError"

    def __init__(self, message=""):
        super(AudError, self).__init__(message)
        self.message = message

    def __str__(self):
        return self.message or self.category


class ConfigError(AudError, ValueError):
    category = "ConfigError"


class ManifestError(AudError):
    category = "ManifestError"


# audio and features


class NotFound(AudError, FileNotFoundError):
    category = "NotFound"


class UnsupportedFormat(AudError):
    category = "UnsupportedFormat"


class CorruptFile(AudError):
    category = "CorruptFile"


class TooShort(AudError):
    category = "TooShort"


class OutOfRange(AudError, IndexError):
    category = "OutOfRange"


# graph clustering


class EmptySequence(AudError):
    category = "EmptySequence"


class DimensionMismatch(AudError):
    category = "DimensionMismatch"


class UnknownCluster(AudError, KeyError):
    category = "UnknownCluster"

    def __str__(self):
        return AudError.__str__(self)


# hmm engine


class SegmentTooShort(AudError):
    category = "SegmentTooShort"


class InfeasibleAlignment(AudError):
    category = "InfeasibleAlignment"


class UnknownLabel(AudError, KeyError):
    category = "UnknownLabel"

    def __str__(self):
        return AudError.__str__(self)


class EmptyInput(AudError):
    category = "EmptyInput"


class InconsistentAlignment(AudError):
    category = "InconsistentAlignment"


# pipeline


class NoUsableClusters(AudError):
    category = "NoUsableClusters"


class EmptyCorpus(AudError):
    category = "EmptyCorpus"


class TargetExceedsKinds(AudError):
    category = "TargetExceedsKinds"


class MissingOccurrence(AudError):
    category = "MissingOccurrence"


class UnknownUnit(AudError, KeyError):
    category = "UnknownUnit"

    def __str__(self):
        return AudError.__str__(self)


# evaluation


class LengthMismatch(AudError):
    category = "LengthMismatch"


class EmptyTranscriptions(AudError):
    category = "EmptyTranscriptions"
