"""Exception hierarchy.

Every error raised by the package derives from :class:`SigVerifyError`.
Errors that point at a specific sample, line or index carry it as an
attribute so callers can report it without parsing the message.
"""


class SigVerifyError(Exception):
    """Base class for all package errors."""


class ValidationError(SigVerifyError, ValueError):
    """A signature violates one of its structural invariants."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class TooFewPoints(ValidationError):
    pass


class NonMonotonicTime(ValidationError):
    pass


class NegativePressure(ValidationError):
    pass


class LengthTooShort(SigVerifyError, ValueError):
    pass


class BadWindow(SigVerifyError, ValueError):
    pass


class SignalTooShort(SigVerifyError, ValueError):
    pass


class LengthMismatch(SigVerifyError, ValueError):
    pass


class TooManyLevels(SigVerifyError, ValueError):
    pass


class EmptyInput(SigVerifyError, ValueError):
    pass


class BadLength(SigVerifyError, ValueError):
    pass


class TooShort(SigVerifyError, ValueError):
    pass


class KTooLarge(SigVerifyError, ValueError):
    pass


class DegenerateData(SigVerifyError, ValueError):
    pass


class DimensionMismatch(SigVerifyError, ValueError):
    pass


class NotFitted(SigVerifyError, RuntimeError):
    pass


class SingleClass(SigVerifyError, ValueError):
    pass


class NoConvergence(SigVerifyError, RuntimeError):
    """SMO ran out of sweeps with KKT violations left.

    ``diagnostics`` holds the iteration count, the remaining violation and
    the partially trained model so the caller can still inspect it.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ParseError(SigVerifyError, ValueError):
    """Malformed signature file. ``line`` is 1-based."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


class HeaderMismatch(ParseError):
    pass


class BadColumnCount(ParseError):
    pass


class NonNumericField(ParseError):
    pass


class DatasetError(SigVerifyError):
    pass


class EmptyDataset(DatasetError):
    pass


class UnparsableFile(DatasetError):
    def __init__(self, message, offenders=()):
        super().__init__(message)
        self.offenders = list(offenders)


class NotEnoughSamples(DatasetError, ValueError):
    pass


class ConfigError(SigVerifyError, ValueError):
    pass
