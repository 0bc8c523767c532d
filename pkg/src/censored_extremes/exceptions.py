"""Exception hierarchy shared by the estimators, the simulation engine and the CLI."""


class CensoredExtremesError(ValueError):
    """Base class for every domain error raised by this package."""


class DataValidationError(CensoredExtremesError):
    """Malformed input data. ``row`` is the 0-based offending row when known."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class TailDomainError(CensoredExtremesError):
    """An estimator precondition does not hold for the given sample and ``k``."""


class DegenerateTailError(TailDomainError):
    """All log-excesses above the threshold are equal."""


class UnsupportedCaseError(CensoredExtremesError):
    """The requested estimator/case/branch combination has no formula."""
