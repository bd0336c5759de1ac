#!/usr/bin/env python
"""
Tests for the WsRHS Energy Efficiency numerical kernel.

This script checks the Hermitian eigen-decomposition, the principal
eigenpair, the conditioned left pseudo-inverse and the Cholesky log-det.
"""

import logging
import math

import numpy as np
import pytest

from wsrhs_ee.services.numerics import (
    hermitian_eig,
    left_pseudo_inverse,
    logdet_psd,
    normalize_phase,
    principal_eigpair,
)
from wsrhs_ee.utils.errors import (
    ConditioningError,
    DimensionError,
    NotPositiveDefiniteError,
    NotPSDError,
    ShapeError,
)

logger = logging.getLogger("test_numerics")


def random_hermitian(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a @ a.conj().T


def test_hermitian_eig_reconstructs():
    """Eigenvalues come out descending and rebuild the matrix."""
    x = random_hermitian(6, 1)
    eig = hermitian_eig(x)
    assert len(eig) == 6
    assert np.all(np.diff(eig.eigenvalues) <= 0)
    np.testing.assert_allclose(eig.reconstruct(), x, atol=1e-9 * np.linalg.norm(x))
    for _, u in eig.pairs():
        k = int(np.argmax(np.abs(u) >= np.abs(u).max() * (1 - 1e-12)))
        assert abs(u[k].imag) < 1e-12
        assert u[k].real > 0
    logger.info(f"Eigenvalues: {eig.eigenvalues}")


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(ShapeError):
        hermitian_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_hermitian_eig_rejects_rectangular():
    with pytest.raises(DimensionError):
        hermitian_eig(np.ones((2, 3)))


def test_normalize_phase_tie_uses_lowest_index():
    v = np.array([1j, -1.0, 0.5])
    out = normalize_phase(v)
    assert out[0] == pytest.approx(1.0)
    assert out[1] == pytest.approx(1j)


def test_principal_eigpair_rank_one():
    u = np.array([1.0, 1j, -1.0]) / math.sqrt(3.0)
    lam, v = principal_eigpair(4.0 * np.outer(u, u.conj()))
    assert lam == pytest.approx(4.0)
    assert abs(np.vdot(u, v)) == pytest.approx(1.0)


def test_principal_eigpair_rejects_indefinite():
    with pytest.raises(NotPSDError):
        principal_eigpair(np.diag([1.0, -1.0]))


def test_left_pseudo_inverse_is_left_inverse():
    rng = np.random.default_rng(3)
    c = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
    c_pinv = left_pseudo_inverse(c)
    np.testing.assert_allclose(c_pinv @ c, np.eye(3), atol=1e-10)


def test_left_pseudo_inverse_errors():
    with pytest.raises(ShapeError):
        left_pseudo_inverse(np.ones((2, 3)))
    with pytest.raises(ConditioningError) as info:
        left_pseudo_inverse(np.ones((3, 2)))
    assert info.value.ratio < 1e-10


def test_logdet_psd():
    assert logdet_psd(np.diag([2.0, 4.0])) == pytest.approx(3.0)
    x = random_hermitian(4, 7) + np.eye(4)
    expected = math.log2(np.linalg.det(x).real)
    assert logdet_psd(x) == pytest.approx(expected, rel=1e-10)
    with pytest.raises(NotPositiveDefiniteError):
        logdet_psd(np.diag([1.0, 0.0]))
