"""Exception hierarchy shared across the package.

The split mirrors how failures are reported to callers (and mapped to CLI
exit codes): bad usage of an API contract, bad input data, numerical
breakdown, and structurally invalid vine matrices.
"""


class SparseVineError(Exception):
    """Base class for all package errors."""


class ContractError(SparseVineError, ValueError):
    """A documented precondition of an operation was violated by the caller."""


class DataError(SparseVineError, ValueError):
    """Input data is unusable (parse failures, degenerate margins, shapes)."""


class ParseError(DataError):
    """A cell could not be parsed; carries 1-based row/column coordinates."""

    def __init__(self, message, row=None, col=None):
        super().__init__(message)
        self.row = row
        self.col = col


class NumericError(SparseVineError, ArithmeticError):
    """A numerical routine received non-finite input or failed to produce output."""


class StructureError(SparseVineError, ValueError):
    """A vine structure matrix is malformed or violates the matrix properties."""
