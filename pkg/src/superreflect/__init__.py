"""Exact verification of graded R-matrices, Hecke representations and
non-diagonal reflection matrices of U_q(gl(m|n))."""

from .algebra import (
    BoundarySpec,
    DiagramKind,
    Family,
    k_matrix_explicit,
    k_matrix_theorem,
    make_grading,
    r_matrix,
)
from .gmatrix import GradedMatrix, Grading, NumericMatrix
from .scalar import GaussRational, Laurent, var
from .verify import CheckResult, TransferContext

__version__ = "0.1.0"

__all__ = [
    "BoundarySpec",
    "CheckResult",
    "DiagramKind",
    "Family",
    "GaussRational",
    "GradedMatrix",
    "Grading",
    "Laurent",
    "NumericMatrix",
    "TransferContext",
    "k_matrix_explicit",
    "k_matrix_theorem",
    "make_grading",
    "r_matrix",
    "var",
    "__version__",
]
