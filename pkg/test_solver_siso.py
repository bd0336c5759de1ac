#!/usr/bin/env python
"""
Tests for the WsRHS Energy Efficiency SISO solver.

This script checks the closed-form surface optimum, the stationary transmit
power and the comparison against the random-search oracle.
"""

import logging
import math

import numpy as np
import pytest

from wsrhs_ee.models.report import Mode, SolveReport
from wsrhs_ee.models.scenario import PowerModel
from wsrhs_ee.services.oracle import OracleBudget, random_search_siso
from wsrhs_ee.services.power_model import check_reflection, surface_powers
from wsrhs_ee.services.solver_siso import optimize_power_siso, optimize_surfaces_siso, solve_siso
from wsrhs_ee.utils.errors import DegenerateChannelError, DimensionError

logger = logging.getLogger("test_solver_siso")


def test_closed_form_gain(channel_factory, unit_power_model):
    channels = channel_factory(1, 1, 3, 5, seed=1)
    solution = solve_siso(channels, 1.0, 1.0, unit_power_model, 10.0)
    h = channels.H[:, 0]
    g = channels.G[0, :]
    lam = np.linalg.eigvalsh(channels.C @ channels.C.conj().T)[-1]
    expected = lam * np.linalg.norm(h) ** 2 * np.linalg.norm(g) ** 2
    assert solution.effective_gain == pytest.approx(expected, rel=1e-9)
    logger.info(f"SISO solution: {solution}")


def test_surfaces_meet_reflection_with_equality(channel_factory, unit_power_model):
    channels = channel_factory(1, 1, 4, 6, seed=2)
    solution = solve_siso(channels, 1.0, 1.0, unit_power_model, 10.0)
    p_in_t, p_out_t, p_in_r, p_out_r = surface_powers(channels, solution.surfaces, solution.power)
    assert p_out_t == pytest.approx(p_in_t, rel=1e-9)
    assert p_out_r == pytest.approx(p_in_r, rel=1e-9)
    assert check_reflection(channels, solution.surfaces, solution.power).feasible


def test_stationary_power_unit_gain():
    p = optimize_power_siso(1.0, PowerModel(mu=1.0, system_overhead=1.0), 10.0, 1.0, 0, 0)
    assert p == pytest.approx(math.e - 1.0, rel=1e-9)


def test_power_budget_binds():
    pm = PowerModel(mu=1.0, system_overhead=1.0)
    assert optimize_power_siso(1.0, pm, 0.5, 1.0, 0, 0) == pytest.approx(0.5)
    assert optimize_power_siso(1.0, pm, 10.0, 1.0, 0, 0, mode=Mode.CAPACITY) == pytest.approx(10.0)
    assert optimize_power_siso(1.0, pm.with_mu(0.0), 10.0, 1.0, 0, 0) == pytest.approx(10.0)


def test_static_power_raises_stationary_power():
    pm = PowerModel(mu=1.0, system_overhead=1.0)
    low = optimize_power_siso(1.0, pm, 100.0, 1.0, 0, 0)
    high = optimize_power_siso(1.0, pm.model_copy(update={"system_overhead": 2.0}), 100.0, 1.0, 0, 0)
    assert high > low
    # (1 + p)·ln(1 + p) = p + P_c at the stationary point
    assert math.log1p(high) * (1.0 + high) == pytest.approx(high + 2.0, rel=1e-9)


def test_surface_elements_enter_static_power():
    pm = PowerModel(mu=1.0, system_overhead=1.0, per_element_static_T=0.25, per_element_static_R=0.25)
    bare = optimize_power_siso(1.0, pm, 100.0, 1.0, 0, 0)
    sized = optimize_power_siso(1.0, pm, 100.0, 1.0, 2, 2)
    assert sized > bare
    reference = optimize_power_siso(1.0, PowerModel(mu=1.0, system_overhead=2.0), 100.0, 1.0, 0, 0)
    assert sized == pytest.approx(reference, rel=1e-9)


def test_power_does_not_depend_on_bandwidth(channel_factory, unit_power_model):
    pm = PowerModel(mu=2.0, system_overhead=0.5)
    assert optimize_power_siso(3.0, pm, 10.0, 1.0, 2, 2) == pytest.approx(
        optimize_power_siso(3.0, pm, 10.0, 20e6, 2, 2), rel=1e-12
    )
    channels = channel_factory(1, 1, 2, 3, seed=6)
    narrow = solve_siso(channels, 1.0, 1.0, unit_power_model, 10.0)
    wide = solve_siso(channels, 1.0, 1e6, unit_power_model, 10.0)
    assert wide.power == pytest.approx(narrow.power, rel=1e-12)
    assert wide.ee == pytest.approx(1e6 * narrow.ee, rel=1e-12)


def test_power_rejects_zero_gain():
    with pytest.raises(DegenerateChannelError):
        optimize_power_siso(0.0, PowerModel(mu=1.0, system_overhead=1.0), 1.0, 1.0, 0, 0)


def test_solution_beats_random_search(channel_factory):
    channels = channel_factory(1, 1, 3, 4, seed=3)
    pm = PowerModel(mu=1.0, system_overhead=1.0, per_element_static_T=0.01, per_element_static_R=0.01)
    solution = solve_siso(channels, 1.0, 1e6, pm, 5.0)
    oracle = random_search_siso(channels, 1.0, 1e6, pm, 5.0, OracleBudget(samples=3000, seed=1))
    assert oracle.ee <= solution.ee * (1.0 + 1e-9)
    assert oracle.effective_gain <= solution.effective_gain * (1.0 + 1e-9)
    logger.info(f"Closed form {solution.ee:.6e} vs random search {oracle.ee:.6e} bit/J")


def test_rejects_multi_antenna_channels(channel_factory, unit_power_model):
    channels = channel_factory(2, 1, 3, 4, seed=4)
    with pytest.raises(DimensionError):
        solve_siso(channels, 1.0, 1.0, unit_power_model, 1.0)


def test_dark_element_switched_off(channel_factory):
    channels = channel_factory(1, 1, 3, 4, seed=5)
    h = channels.H[:, 0].copy()
    h[1] = 0.0
    report = SolveReport()
    surfaces = optimize_surfaces_siso(h, channels.G[0, :].conj(), channels.C, report)
    assert surfaces.gamma_T[1] == 0.0
    assert any("near-zero illumination" in note for note in report.notes)


def test_zero_channel_is_degenerate(channel_factory):
    channels = channel_factory(1, 1, 2, 2, seed=6)
    with pytest.raises(DegenerateChannelError):
        optimize_surfaces_siso(np.zeros(2), channels.G[0, :].conj(), channels.C)
