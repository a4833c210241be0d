"""Exception types raised across the package."""


class LVPIRError(Exception):
    """Base class for all package errors."""


class ParseError(LVPIRError, ValueError):
    """A matrix, plan or database file contains a malformed token."""


class ShapeError(LVPIRError, ValueError):
    """Declared dimensions disagree with the data (ragged rows, wrong counts)."""


class StochasticityError(LVPIRError, ValueError):
    """A column of the characteristic matrix is not a probability distribution."""

    def __init__(self, message, column=None, total=None):
        super().__init__(message)
        self.column = column
        self.total = total


class TooLargeError(LVPIRError):
    """K exceeds the enumeration cap of the exhaustive planner."""


class TooManyQueriesError(LVPIRError):
    """A plan has more realizable queries than the exact audit may enumerate."""


class NotInQueryError(LVPIRError, LookupError):
    """The requested index is not part of the submitted query."""


class WireError(LVPIRError):
    """A protocol frame was rejected; ``reason`` is the one-byte error code."""

    def __init__(self, reason, message=""):
        super().__init__(message or f"wire error reason={reason}")
        self.reason = reason
