"""Rank decisions, nullspace bases and orthogonal projection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFiniteEntry

DEFAULT_REL_TOL = 1e-9


@dataclass(frozen=True)
class TolerancedBasis:
    """Orthonormal basis stored as the columns of ``columns``.

    ``rank_tol`` is the absolute singular-value cutoff that produced it.
    """

    columns: np.ndarray
    rank_tol: float

    @property
    def dim(self) -> int:
        return self.columns.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.columns.shape[0]


_PIVOT_TOL = 1e-6


def _echelon_basis(cols: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(cols) that depends only on the subspace.

    SVD returns an arbitrary rotation of the kernel.  Row-reducing the basis
    and orthonormalizing the echelon rows in order gives the same answer for
    every basis of the same subspace, with a positive pivot entry per vector.
    """
    R = cols.T.copy()
    k, n = R.shape
    row = 0
    for j in range(n):
        if row == k:
            break
        p = row + int(np.argmax(np.abs(R[row:, j])))
        if abs(R[p, j]) < _PIVOT_TOL:
            continue
        R[[row, p]] = R[[p, row]]
        R[row] /= R[row, j]
        others = np.arange(k) != row
        R[others] -= np.outer(R[others, j], R[row])
        row += 1
    R[np.abs(R) < 1e-12] = 0.0
    # Gram-Schmidt (two passes) keeps exact zeros of the echelon form exact.
    Q = np.zeros((n, k))
    for i in range(k):
        v = R[i].copy()
        for _ in range(2):
            v -= Q[:, :i] @ (Q[:, :i].T @ v)
        Q[:, i] = v / np.linalg.norm(v)
    return Q + 0.0


def singular_values(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return np.zeros(0)
    return np.linalg.svd(A, compute_uv=False)


def nullspace_basis(A, rel_tol: float = DEFAULT_REL_TOL) -> TolerancedBasis:
    """Orthonormal basis of the numerical kernel of ``A``.

    Singular values at or below ``sigma_max * rel_tol`` count as zero.  A
    matrix with no rows, or with only zero entries, has the whole domain as
    its kernel.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFiniteEntry("matrix has non-finite entries")
    if not 0.0 < rel_tol < 1.0:
        raise ValueError(f"rel_tol must lie in (0, 1), got {rel_tol!r}")
    m, n = A.shape
    if m == 0 or n == 0 or not A.any():
        return TolerancedBasis(np.eye(n), 0.0)

    _, s, vh = np.linalg.svd(A, full_matrices=True)
    cutoff = s[0] * rel_tol
    rank = int(np.count_nonzero(s > cutoff))
    raw = vh[rank:].T
    cols = _echelon_basis(raw)
    # fall back to the SVD basis if reduction amplified round-off
    if raw.size and np.abs(A @ cols).max() > 10 * np.abs(A @ raw).max() + cutoff:
        cols = raw
    return TolerancedBasis(cols, float(cutoff))


def matrix_rank(A, rel_tol: float = DEFAULT_REL_TOL) -> int:
    A = np.asarray(A, dtype=float)
    return A.shape[1] - nullspace_basis(A, rel_tol).dim


def project_onto(basis: TolerancedBasis, x) -> np.ndarray:
    """Orthogonal projection ``B (B^T x)`` onto the span of the basis."""
    x = np.asarray(x, dtype=float)
    if x.shape != (basis.ambient_dim,):
        raise DimensionMismatch(
            f"vector of shape {x.shape} does not match ambient dimension {basis.ambient_dim}"
        )
    B = basis.columns
    return B @ (B.T @ x)
