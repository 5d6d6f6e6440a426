"""Exception types shared across the package."""


class HiveLabError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class DomainError(HiveLabError, ValueError):
    """An argument lies outside the domain of an operation."""

    exit_code = 64


class InvariantError(HiveLabError, ValueError):
    """An input object violates one of its structural invariants."""

    exit_code = 2


class InfeasibleError(HiveLabError):
    """A linear inequality system has no (strictly) feasible point."""

    exit_code = 2


class UnboundedError(HiveLabError):
    """A polytope expected to be bounded is not."""

    exit_code = 3


class NumericError(HiveLabError, ArithmeticError):
    """A numerical routine failed its own consistency check."""

    exit_code = 3


class DegenerateCellError(HiveLabError):
    """A dyadic cell contains no rhombus of the requested kind."""

    exit_code = 3

    def __init__(self, msg, cell=None, kind=None):
        super().__init__(msg)
        self.cell = cell
        self.kind = kind
