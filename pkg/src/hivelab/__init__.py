"""Hives, Gelfand-Tsetlin patterns, polytope volumes, surface tension and spectra of sums."""

__version__ = "0.1.0"

from .errors import (DegenerateCellError, DomainError, HiveLabError, InfeasibleError,  # noqa: E402
                     InvariantError, NumericError, UnboundedError)

__all__ = [
    "HiveLabError", "DomainError", "InvariantError", "InfeasibleError", "UnboundedError",
    "NumericError", "DegenerateCellError", "__version__",
]
