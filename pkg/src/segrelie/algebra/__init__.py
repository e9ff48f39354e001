"""Exact rational polynomials, truncated series and sparse linear algebra."""

from .linalg import (ExactMatrix, SingularMatrixError, dense_to_sparse, nullspace_from_rref,
                     rref_rank_nullspace, sparse_rank, sparse_rref)
from .polynomial import ContextError, Polynomial, as_fraction, glex_key
from .series import TruncatedSeries, TruncationError, implicit_solve, series_substitute

__all__ = [
    "ContextError", "ExactMatrix", "Polynomial", "SingularMatrixError", "TruncatedSeries",
    "TruncationError", "as_fraction", "dense_to_sparse", "glex_key", "implicit_solve",
    "nullspace_from_rref", "rref_rank_nullspace", "series_substitute", "sparse_rank", "sparse_rref",
]
