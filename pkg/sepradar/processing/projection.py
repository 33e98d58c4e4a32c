"""
Interference cancellation by orthogonal projection.

The projector onto the complement of span{x_m, X_m} is only ever applied as
v - U (U^H v) with U an orthonormal basis from a column-pivoted QR of the
interference matrix; the Q x Q matrix is never formed.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr

from sepradar.config import get_settings
from sepradar.exceptions import InvalidArgumentError
from sepradar.processing.batching import Batch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProjectionBasis:
    index: int
    u: np.ndarray
    n_columns: int

    @property
    def rank(self) -> int:
        return self.u.shape[1]

    @property
    def size(self) -> int:
        return self.u.shape[0]

    @property
    def rank_deficient(self) -> bool:
        return self.rank < self.n_columns


def basis_from_matrix(matrix: np.ndarray, index: int = 0) -> ProjectionBasis:
    """Orthonormal basis of the column span, numerical rank from the pivoted R diagonal."""
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[1] > matrix.shape[0]:
        raise InvalidArgumentError(f"Interference matrix must be tall, got shape {matrix.shape}")
    n_rows, n_cols = matrix.shape
    if n_cols == 0:
        return ProjectionBasis(index=index, u=np.zeros((n_rows, 0), dtype=np.complex128), n_columns=0)

    q, r, _ = qr(matrix, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = get_settings().rank_rtol_factor * n_rows * np.finfo(float).eps * diag[0]
    rank = int(np.count_nonzero(diag > tol))
    if rank < n_cols:
        logger.warning(
            "Batch %d: interference matrix has numerical rank %d of %d columns",
            index, rank, n_cols,
        )
    return ProjectionBasis(index=index, u=q[:, :rank], n_columns=n_cols)


def build_basis(batch: Batch) -> ProjectionBasis:
    return basis_from_matrix(batch.interference_matrix(), batch.index)


def project_out(basis: ProjectionBasis, v: np.ndarray) -> np.ndarray:
    """Apply I - U U^H to a length-Q vector or to each column of a Q x k array."""
    v = np.asarray(v)
    if v.shape[0] != basis.size:
        raise InvalidArgumentError(f"Vector length {v.shape[0]} does not match Q={basis.size}")
    u = basis.u
    return v - u @ (u.conj().T @ v)
