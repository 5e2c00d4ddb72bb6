"""Exception hierarchy.

Everything raised on bad input derives from :class:`TrayRecError` so the CLI
can map it to exit code 1; filesystem problems surface as ``OSError`` (exit 2).
"""


class TrayRecError(Exception):
    """Base class for all validation failures."""


class ZeroVector(TrayRecError):
    pass


class DimensionMismatch(TrayRecError):
    pass


class UnknownClass(TrayRecError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class EmptyTemplateSet(TrayRecError):
    pass


class ParseError(TrayRecError):
    pass


class ValidationError(TrayRecError):
    pass


class InvalidParameter(TrayRecError, ValueError):
    pass


class MissingWindowFeatures(TrayRecError):
    pass


class NoGroundTruth(TrayRecError):
    pass


class InsufficientData(TrayRecError):
    pass


class DegenerateVariance(TrayRecError):
    pass


class EmptyPatch(TrayRecError):
    pass


class InvalidSpec(TrayRecError, ValueError):
    pass
