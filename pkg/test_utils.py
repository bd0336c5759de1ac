#!/usr/bin/env python
"""
Tests for the WsRHS Energy Efficiency utilities.

This script checks the array coercion helpers and that the models layer
depends on utils only, never on services.
"""

import ast
import logging
from pathlib import Path

import numpy as np
import pytest

import wsrhs_ee.models as models_pkg
from wsrhs_ee.models import state
from wsrhs_ee.services import numerics
from wsrhs_ee.utils.arrays import PSD_TOL, as_complex_matrix, as_complex_vector, hermitian_part
from wsrhs_ee.utils.errors import DomainError, ShapeError

logger = logging.getLogger("test_utils")


def test_matrix_coercion():
    m = as_complex_matrix([[1, 2], [3, 4]])
    assert m.dtype == np.complex128
    assert m.shape == (2, 2)
    assert as_complex_matrix([1.0, 2.0, 3.0]).shape == (3, 1)
    with pytest.raises(ShapeError):
        as_complex_matrix(np.zeros((2, 2, 2)))
    with pytest.raises(DomainError):
        as_complex_matrix([[np.nan, 0.0]], "H")


def test_vector_coercion():
    v = as_complex_vector([[1.0], [2.0j]])
    np.testing.assert_array_equal(v, [1.0, 2.0j])
    with pytest.raises(DomainError):
        as_complex_vector([np.inf])


def test_hermitian_part():
    x = np.array([[1.0, 2.0 + 1.0j], [0.0, 3.0]])
    h = hermitian_part(x)
    np.testing.assert_allclose(h, h.conj().T)
    np.testing.assert_allclose(np.diag(h), [1.0, 3.0])
    assert h[0, 1] == pytest.approx(1.0 + 0.5j)


def test_models_and_services_share_helpers():
    assert state.as_complex_matrix is as_complex_matrix
    assert numerics.as_complex_matrix is as_complex_matrix
    assert state.PSD_TOL == numerics.PSD_TOL == PSD_TOL


def test_models_do_not_import_services():
    offenders = []
    for path in Path(models_pkg.__file__).parent.glob("*.py"):
        tree = ast.parse(path.read_text(encoding="utf-8"))
        for node in ast.walk(tree):
            if isinstance(node, ast.ImportFrom) and (node.module or "").startswith("wsrhs_ee.services"):
                offenders.append(f"{path.name}: {node.module}")
            elif isinstance(node, ast.Import):
                offenders.extend(f"{path.name}: {a.name}" for a in node.names if a.name.startswith("wsrhs_ee.services"))
    assert offenders == []
