#!/usr/bin/env python
"""
Test script for WsRHS Energy Efficiency models.

This script tests the draw store, the pydantic configuration models, the
transmit and surface state containers and the bundled experiment files.
"""

import json
import logging
import time
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from wsrhs_ee.config import config
from wsrhs_ee.models import (
    DrawRecord,
    ExperimentConfig,
    SolveReport,
    SolverOptions,
    SweepSpec,
    SurfaceState,
    TransmitKind,
    TransmitState,
    as_transmit_state,
    get_engine,
    get_session,
    init_db,
)
from wsrhs_ee.models.report import Deadline
from wsrhs_ee.models.scenario import ArrayGeometry
from wsrhs_ee.utils.errors import NotPSDError, SolverTimeoutError

logger = logging.getLogger("test_models")


def test_draw_record_roundtrip():
    """Create the store in memory, add a record and read it back."""
    engine = get_engine("sqlite:///:memory:")
    init_db(engine)
    db = get_session(engine)
    try:
        record = DrawRecord(
            experiment_id="demo:WsRHS_SISO:EE:0",
            sweep_index=0,
            draw_index=3,
            sweep_value=10.0,
            ee_bits_per_joule=1.5e6,
            capacity_bps=2.0e7,
            outer_iters=0,
            failed=False,
        )
        db.add(record)
        db.commit()
        logger.info("Added DrawRecord: %s", record)

        stored = db.query(DrawRecord).filter_by(draw_index=3).one()
        assert stored.to_dict()["ee_bits_per_joule"] == 1.5e6
        assert stored.created_at is not None
    finally:
        db.close()


def test_solver_options_validation():
    assert SolverOptions().inner_tol == 1e-10
    with pytest.raises(ValidationError):
        SolverOptions(max_iters=0)
    with pytest.raises(ValidationError):
        SolverOptions(barrier_mu=1.0)
    with pytest.raises(ValidationError):
        SolverOptions(time_limit_s=0.0)


def test_sweep_values_must_ascend():
    with pytest.raises(ValidationError):
        SweepSpec(values=[10.0, 0.0])
    with pytest.raises(ValidationError):
        SweepSpec(values=[float("nan")])


def test_bundled_experiments_validate():
    files = sorted(Path(config.json_dir).glob("*_sweep.json"))
    assert files
    for path in files:
        experiment = ExperimentConfig.model_validate(json.loads(path.read_text()))
        assert experiment.monte_carlo_draws >= 1
        assert experiment.scenario.m_tx <= experiment.scenario.m_rx
        logger.info(f"{path.name}: {experiment.architecture.value}, {len(experiment.sweep.values)} points")


def test_transmit_state_forms_agree():
    q = np.array([1.0, 1j])
    beam = TransmitState.beamvector(q)
    cov = as_transmit_state(np.outer(q, q.conj()))
    assert cov.kind == TransmitKind.COVARIANCE
    assert beam.trace() == pytest.approx(cov.trace())
    np.testing.assert_allclose(beam.covariance(), cov.covariance())
    f = cov.factor()
    np.testing.assert_allclose(f @ f.conj().T, cov.covariance(), atol=1e-12)
    assert as_transmit_state(0.25).trace() == 0.25


def test_transmit_state_rejects_indefinite_covariance():
    with pytest.raises(NotPSDError):
        TransmitState.covariance_form(np.diag([1.0, -1.0]))


def test_surface_state_unit():
    surfaces = SurfaceState.unit(3, 5)
    assert surfaces.max_modulus() == 1.0
    assert surfaces.gamma_R.size == 5


def test_report_trace_helpers():
    report = SolveReport([1.0, 2.0, 2.0])
    assert report.final_objective == 2.0
    assert report.is_nondecreasing()
    report.add_note("kept the incumbent")
    report.add_note("kept the incumbent")
    assert report.notes == ["kept the incumbent"]
    assert not SolveReport([2.0, 1.0]).is_nondecreasing()


def test_deadline_expires():
    Deadline(None).check("unlimited")
    deadline = Deadline(1e-6)
    time.sleep(0.01)
    with pytest.raises(SolverTimeoutError):
        deadline.check("outer loop")


def test_grid_block_expands_with_meter_spacings():
    geometry = ArrayGeometry.model_validate(
        {"grid": {"rows": 2, "cols": 3, "h_spacing": 0.05, "v_spacing": 0.04, "center": [1.0, 0.0, 0.25]}}
    )
    pts = geometry.positions()
    assert geometry.count == 6
    assert (geometry.h_spacing, geometry.v_spacing) == (0.05, 0.04)
    assert np.linalg.norm(pts[1] - pts[0]) == pytest.approx(0.05)
    assert np.linalg.norm(pts[3] - pts[0]) == pytest.approx(0.04)
    np.testing.assert_allclose(pts.mean(axis=0), [1.0, 0.0, 0.25], atol=1e-12)
    np.testing.assert_allclose(pts[:, 2], 0.25, atol=1e-12)
