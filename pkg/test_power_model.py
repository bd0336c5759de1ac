#!/usr/bin/env python
"""
Tests for the WsRHS Energy Efficiency power model service.

This script checks the capacity formula for all transmit forms, the surface
input and output powers, the reflection check and the EE ratio.
"""

import logging
import math

import numpy as np
import pytest

from wsrhs_ee.models.scenario import PowerModel
from wsrhs_ee.models.state import SurfaceState, TransmitState
from wsrhs_ee.services.power_model import (
    capacity,
    check_reflection,
    energy_efficiency,
    surface_powers,
    total_power,
)
from wsrhs_ee.utils.errors import DimensionError, DomainError, ModelError
from wsrhs_ee.utils.units import dbm_to_watts

logger = logging.getLogger("test_power_model")


def test_siso_capacity_closed_form(channel_factory):
    channels = channel_factory(1, 1, 3, 4, seed=1)
    surfaces = SurfaceState(np.exp(1j * np.arange(3)), 0.5 * np.ones(4))
    p = 0.7
    gain = channels.composite(surfaces)[0, 0]
    expected = 2e6 * math.log2(1.0 + abs(gain) ** 2 * p / 0.5)
    assert capacity(channels, surfaces, p, 0.5, 2e6) == pytest.approx(expected, rel=1e-12)


def test_capacity_forms_agree(channel_factory):
    channels = channel_factory(3, 2, 4, 5, seed=2)
    surfaces = SurfaceState.unit(4, 5)
    rng = np.random.default_rng(2)
    q = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    from_beam = capacity(channels, surfaces, TransmitState.beamvector(q), 1.0, 1.0)
    from_cov = capacity(channels, surfaces, np.outer(q, q.conj()), 1.0, 1.0)
    assert from_beam == pytest.approx(from_cov, rel=1e-10)


def test_capacity_rejects_bad_inputs(channel_factory):
    channels = channel_factory(2, 2, 3, 3, seed=3)
    surfaces = SurfaceState.unit(3, 3)
    with pytest.raises(DomainError):
        capacity(channels, surfaces, np.eye(2), 0.0, 1.0)
    with pytest.raises(DimensionError):
        capacity(channels, surfaces, np.eye(3), 1.0, 1.0)


def test_unit_modulus_surfaces_meet_reflection_with_equality(channel_factory):
    channels = channel_factory(2, 2, 4, 6, seed=4)
    surfaces = SurfaceState(np.exp(1j * np.linspace(0, 3, 4)), np.exp(-1j * np.linspace(0, 2, 6)))
    p_in_t, p_out_t, p_in_r, p_out_r = surface_powers(channels, surfaces, np.eye(2))
    assert p_out_t == pytest.approx(p_in_t, rel=1e-12)
    assert p_out_r == pytest.approx(p_in_r, rel=1e-12)
    assert check_reflection(channels, surfaces, np.eye(2)).feasible


def test_reflection_violation_detected(channel_factory):
    channels = channel_factory(1, 1, 2, 2, seed=5)
    surfaces = SurfaceState(2.0 * np.ones(2), np.ones(2))
    report = check_reflection(channels, surfaces, 1.0)
    assert not report.feasible_T
    assert report.residual_T == pytest.approx(3.0 * report.p_in_T)
    assert report.to_dict()["feasible"] is False


def test_energy_efficiency_ratio(channel_factory):
    channels = channel_factory(1, 1, 2, 2, seed=6)
    surfaces = SurfaceState.unit(2, 2)
    pm = PowerModel.from_dbm()
    p = 0.1
    p_c = pm.static_power(2, 2, 1, 1)
    assert p_c == pytest.approx(2 * dbm_to_watts(0) + 2 * dbm_to_watts(34) + dbm_to_watts(37))
    expected = capacity(channels, surfaces, p, 1.0, 1e6) / (p + p_c)
    assert energy_efficiency(channels, surfaces, p, 1.0, 1e6, pm) == pytest.approx(expected)
    assert total_power(p, pm, 2, 2, 1, 1) == pytest.approx(p + p_c)


def test_energy_efficiency_zero_power_is_error(channel_factory):
    channels = channel_factory(1, 1, 2, 2, seed=7)
    with pytest.raises(ModelError):
        energy_efficiency(channels, SurfaceState.unit(2, 2), 0.0, 1.0, 1.0, PowerModel(mu=1.0))
