#!/usr/bin/env python
"""
Tests for the WsRHS Energy Efficiency single-stream solver.

This script checks the closed-form surfaces for a fixed beamvector, the
monotone alternating loop, feasibility of its output and the agreement with
the SISO closed form when both ends have one antenna.
"""

import logging

import numpy as np
import pytest

from wsrhs_ee.models.report import Mode, SolverOptions
from wsrhs_ee.models.scenario import PowerModel
from wsrhs_ee.models.state import SurfaceState
from wsrhs_ee.services.power_model import check_reflection
from wsrhs_ee.services.solver_single_stream import (
    alternate_single_stream,
    initial_beamvector,
    objective_power_model,
    optimize_surfaces_given_q,
    sfp_beamforming,
)
from wsrhs_ee.services.solver_siso import solve_siso
from wsrhs_ee.utils.errors import DegenerateChannelError

logger = logging.getLogger("test_solver_single_stream")


def test_surfaces_given_q_meet_reflection(channel_factory):
    channels = channel_factory(3, 2, 3, 5, seed=1)
    q = np.array([1.0, 0.5j, -0.3])
    surfaces = optimize_surfaces_given_q(q, channels)
    report = check_reflection(channels, surfaces, q.reshape(-1, 1) @ q.conj().reshape(1, -1))
    assert report.feasible
    assert report.p_out_T == pytest.approx(report.p_in_T, rel=1e-9)


def test_surfaces_given_q_rejects_null_beam(channel_factory):
    channels = channel_factory(2, 1, 2, 3, seed=2)
    channels.H[:, 1] = 0.0
    with pytest.raises(DegenerateChannelError):
        optimize_surfaces_given_q(np.array([0.0, 1.0]), channels)


def test_alternation_is_monotone_and_feasible(channel_factory, unit_power_model, fast_opts):
    channels = channel_factory(3, 2, 3, 4, seed=3)
    p_max = 4.0
    solution = alternate_single_stream(channels, unit_power_model, p_max, 1.0, 1.0, fast_opts)
    assert solution.report.is_nondecreasing(slack=1e-12)
    assert solution.power <= p_max * (1.0 + 1e-6)
    assert check_reflection(channels, solution.surfaces, np.outer(solution.q, solution.q.conj())).feasible
    assert solution.ee > 0
    logger.info(f"Single-stream: {solution}")


@pytest.mark.parametrize("seed", range(20))
def test_single_antenna_matches_siso(channel_factory, unit_power_model, seed):
    channels = channel_factory(1, 1, 2, 2, seed=seed)
    siso = solve_siso(channels, 1.0, 1.0, unit_power_model, 10.0)
    solution = alternate_single_stream(channels, unit_power_model, 10.0, 1.0, 1.0, SolverOptions())
    assert solution.ee == pytest.approx(siso.ee, rel=1e-4)
    assert solution.ee <= siso.ee * (1.0 + 1e-9)


def test_capacity_mode_uses_full_power(channel_factory, unit_power_model, fast_opts):
    channels = channel_factory(1, 1, 2, 3, seed=5)
    solution = alternate_single_stream(channels, unit_power_model, 2.0, 1.0, 1.0, fast_opts, Mode.CAPACITY)
    assert solution.power == pytest.approx(2.0, rel=1e-4)


def test_capacity_mode_power_model(unit_power_model):
    pm = objective_power_model(unit_power_model, Mode.CAPACITY)
    assert pm.mu == 0.0
    assert pm.static_power(4, 4, 2, 2) == pytest.approx(1.0)
    assert objective_power_model(unit_power_model, Mode.EE) is unit_power_model


def test_beam_sfp_is_monotone_and_feasible(channel_factory, unit_power_model):
    channels = channel_factory(3, 2, 3, 4, seed=6)
    p_max = 2.0
    q0 = initial_beamvector(channels, p_max)
    surfaces = optimize_surfaces_given_q(q0, channels)
    q, report = sfp_beamforming(
        channels, surfaces, unit_power_model, p_max, 1.0, 1.0, q0, SolverOptions(max_sfp_iters=20)
    )
    assert report.is_nondecreasing()
    assert report.objective_trace[-1] >= report.objective_trace[0]
    assert np.vdot(q, q).real <= p_max * (1.0 + 1e-6)
    assert check_reflection(channels, surfaces, np.outer(q, q.conj()), tol=1e-6).feasible


def test_beam_sfp_unit_surfaces_only_bound_by_budget(channel_factory):
    # Unit-modulus surfaces make both reflection constraints implied; with no
    # transmit power cost the beam saturates the budget
    channels = channel_factory(2, 2, 2, 3, seed=7)
    surfaces = SurfaceState.unit(2, 3)
    pm = objective_power_model(PowerModel(mu=1.0, system_overhead=1.0), Mode.CAPACITY)
    q0 = 0.5 * initial_beamvector(channels, 1.0)
    q, report = sfp_beamforming(channels, surfaces, pm, 1.0, 1.0, 1.0, q0, SolverOptions(max_sfp_iters=50))
    assert np.vdot(q, q).real == pytest.approx(1.0, rel=1e-4)
    assert report.objective_trace[-1] > report.objective_trace[0]
