"""
Numerical kernel for WsRHS Energy Efficiency.

This module provides the complex-matrix decompositions every solver relies on:
Hermitian eigen-decomposition with a deterministic phase rule, the principal
eigenpair, a conditioned left pseudo-inverse and a Cholesky-based log-det.
"""

import logging
from typing import Dict, List, Tuple

import numpy as np
import scipy.linalg

from wsrhs_ee.utils.arrays import PSD_TOL, as_complex_matrix, hermitian_part
from wsrhs_ee.utils.errors import (
    ConditioningError,
    DimensionError,
    NotPositiveDefiniteError,
    NotPSDError,
    ShapeError,
)

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-9
PINV_THRESHOLD = 1e-10
PHASE_TIE_TOL = 1e-12


def normalize_phase(v: np.ndarray) -> np.ndarray:
    """
    Rotate a vector so its first largest-modulus component is real nonnegative.

    Components whose modulus is within a relative 1e-12 of the maximum count as
    ties; the lowest index wins.
    """
    mags = np.abs(v)
    peak = mags.max() if mags.size else 0.0
    if peak == 0.0:
        return v
    idx = int(np.argmax(mags >= peak * (1.0 - PHASE_TIE_TOL)))
    return v * np.exp(-1j * np.angle(v[idx]))


class HermitianEigen:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending."""

    def __init__(self, eigenvalues: np.ndarray, eigenvectors: np.ndarray):
        """
        Initialize the decomposition.

        Args:
            eigenvalues: Real eigenvalues in descending order
            eigenvectors: Unit-norm eigenvectors as columns, same order
        """
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        """Return Σ λ_i u_i u_iᴴ."""
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T

    def pairs(self) -> List[Tuple[float, np.ndarray]]:
        """List of (eigenvalue, eigenvector) pairs in descending order."""
        return [(float(lam), self.eigenvectors[:, i]) for i, lam in enumerate(self.eigenvalues)]

    def to_dict(self) -> Dict:
        """Convert the decomposition to a dictionary for serialization."""
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "size": int(self.eigenvectors.shape[0]),
        }


def hermitian_eig(x) -> HermitianEigen:
    """
    Eigen-decompose a Hermitian matrix.

    The input is symmetrized before decomposition. Eigenvectors follow the phase
    rule of ``normalize_phase``.

    Args:
        x: Square Hermitian matrix

    Returns:
        HermitianEigen with descending eigenvalues
    """
    x = as_complex_matrix(x, "X")
    if x.shape[0] != x.shape[1]:
        raise DimensionError(f"Hermitian eigen-decomposition needs a square matrix, got {x.shape}")

    scale = np.linalg.norm(x)
    asym = np.linalg.norm(x - x.conj().T)
    if asym > HERMITIAN_TOL * scale:
        raise ShapeError(f"Matrix is not Hermitian: ‖X − Xᴴ‖_F = {asym:.3e}, ‖X‖_F = {scale:.3e}")

    values, vectors = scipy.linalg.eigh(hermitian_part(x))
    values = values[::-1].copy()
    vectors = vectors[:, ::-1].copy()
    for i in range(vectors.shape[1]):
        vectors[:, i] = normalize_phase(vectors[:, i])
    return HermitianEigen(values, vectors)


def principal_eigpair(x) -> Tuple[float, np.ndarray]:
    """
    Largest eigenvalue and its eigenvector for a PSD matrix.

    Args:
        x: Hermitian positive semidefinite matrix

    Returns:
        Tuple of (λ_max, unit eigenvector)
    """
    eig = hermitian_eig(x)
    scale = float(np.max(np.abs(eig.eigenvalues))) if len(eig) else 0.0
    if len(eig) and eig.eigenvalues[-1] < -PSD_TOL * scale:
        raise NotPSDError(
            f"Matrix is not PSD: smallest eigenvalue {eig.eigenvalues[-1]:.3e} (scale {scale:.3e})"
        )
    return float(eig.eigenvalues[0]), eig.eigenvectors[:, 0]


def left_pseudo_inverse(c) -> np.ndarray:
    """
    Left pseudo-inverse C⁺ with C⁺C = I via the singular-value decomposition.

    Args:
        c: Tall or square matrix with full column rank

    Returns:
        The cols × rows matrix C⁺
    """
    c = as_complex_matrix(c, "C")
    rows, cols = c.shape
    if cols > rows:
        raise ShapeError(
            f"Left inverse needs cols <= rows, got {rows}x{cols}; "
            "swap the surface roles or reduce the transmit surface size"
        )
    u, s, vh = scipy.linalg.svd(c, full_matrices=False)
    ratio = float(s[-1] / s[0]) if s[0] > 0 else 0.0
    if ratio < PINV_THRESHOLD:
        raise ConditioningError(
            f"Matrix is rank deficient: σ_min/σ_max = {ratio:.3e}", ratio=ratio
        )
    return (vh.conj().T / s) @ u.conj().T


def logdet_psd(x) -> float:
    """
    log₂ det(X) for a Hermitian positive definite matrix via Cholesky.

    Args:
        x: Hermitian positive definite matrix

    Returns:
        The base-2 log-determinant
    """
    x = as_complex_matrix(x, "X")
    if x.shape[0] != x.shape[1]:
        raise DimensionError(f"log-det needs a square matrix, got {x.shape}")
    try:
        factor = scipy.linalg.cholesky(hermitian_part(x), lower=True)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefiniteError(f"Cholesky factorization failed: {e}") from e
    return float(2.0 * np.sum(np.log2(np.real(np.diag(factor)))))
