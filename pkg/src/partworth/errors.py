"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: ValidationError -> 2, DataError -> 3,
NumericError -> 4.
"""


class PartworthError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(PartworthError):
    """Bad arguments, shapes, or values supplied by the caller."""


class ShapeError(ValidationError):
    """Array dimensions do not match what an operation requires."""


class ProtocolError(ValidationError):
    """An operation was called out of order (e.g. backward before forward)."""


class DataError(PartworthError):
    """A data file is missing, malformed, or violates its documented layout."""


class NumericError(PartworthError):
    """Training or evaluation produced non-finite numbers."""
