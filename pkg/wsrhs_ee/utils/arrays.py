"""
Array coercion helpers for WsRHS Energy Efficiency.

Shared by the state containers and the numerical services.
"""

import numpy as np

from wsrhs_ee.utils.errors import DomainError, ShapeError

PSD_TOL = 1e-9


def as_complex_matrix(x, name: str = "matrix") -> np.ndarray:
    """
    Coerce input to a finite 2-D complex array.

    Args:
        x: Array-like input
        name: Name used in error messages

    Returns:
        A complex128 array with two dimensions
    """
    arr = np.asarray(x, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got {arr.ndim} dimensions")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def as_complex_vector(x, name: str = "vector") -> np.ndarray:
    """Coerce input to a finite 1-D complex array."""
    arr = np.asarray(x, dtype=np.complex128).ravel()
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def hermitian_part(x: np.ndarray) -> np.ndarray:
    """Return (X + Xᴴ)/2."""
    return 0.5 * (x + x.conj().T)
