#!/usr/bin/env python
"""
Tests for the WsRHS Energy Efficiency multi-stream solver.

This script checks the surface subproblem builders against the capacity and
reflection formulas, the surface and covariance steps on instances with known
optima, and the monotone, feasible alternating loop.
"""

import logging

import numpy as np
import pytest

from wsrhs_ee.models.report import Mode, SolveReport, SolverOptions, Termination
from wsrhs_ee.models.state import SurfaceState
from wsrhs_ee.services.convex_core import convexify_homogeneous
from wsrhs_ee.services.oracle import water_filling_capacity
from wsrhs_ee.services.power_model import capacity, check_reflection, surface_powers
from wsrhs_ee.services.solver_multi_stream import (
    alternate_multi_stream,
    build_gamma_r_subproblem,
    build_gamma_t_subproblem,
    closed_form_restart,
    optimize_gamma_r,
    optimize_gamma_t,
    optimize_Q,
)
from wsrhs_ee.services.solver_siso import optimize_power_siso, solve_siso
from wsrhs_ee.utils.errors import DimensionError

logger = logging.getLogger("test_solver_multi_stream")


def random_surfaces(m_tx: int, m_rx: int, seed: int) -> SurfaceState:
    rng = np.random.default_rng(seed)
    gamma_t = rng.uniform(0.3, 1.0, m_tx) * np.exp(1j * rng.uniform(0, 2 * np.pi, m_tx))
    gamma_r = rng.uniform(0.3, 1.0, m_rx) * np.exp(1j * rng.uniform(0, 2 * np.pi, m_rx))
    return SurfaceState(gamma_t, gamma_r)


def random_covariance(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a @ a.conj().T / n


def test_receive_subproblem_reproduces_capacity_and_reflection(channel_factory):
    channels = channel_factory(2, 2, 3, 4, seed=1)
    surfaces = random_surfaces(3, 4, 1)
    q_mat = random_covariance(2, 1)
    sub = build_gamma_r_subproblem(channels, surfaces.gamma_T, q_mat, 1.0)
    assert sub.capacity_term(surfaces.gamma_R) == pytest.approx(capacity(channels, surfaces, q_mat, 1.0, 1.0))
    _, _, p_in_r, p_out_r = surface_powers(channels, surfaces, q_mat)
    assert sub.trace_value(surfaces.gamma_R) == pytest.approx(p_out_r - p_in_r, abs=1e-9 * p_in_r)


def test_transmit_subproblem_reproduces_capacity_and_reflection(channel_factory):
    channels = channel_factory(2, 3, 3, 4, seed=2)
    surfaces = random_surfaces(3, 4, 2)
    q_mat = random_covariance(2, 2)
    sub = build_gamma_t_subproblem(channels, surfaces.gamma_R, q_mat, 0.5)
    assert sub.capacity_term(surfaces.gamma_T) == pytest.approx(capacity(channels, surfaces, q_mat, 0.5, 1.0))
    p_in_t, p_out_t, p_in_r, p_out_r = surface_powers(channels, surfaces, q_mat)
    assert sub.trace_value(surfaces.gamma_T) == pytest.approx(p_out_t - p_in_t, abs=1e-9 * p_in_t)
    assert sub.extra_value(surfaces.gamma_T) == pytest.approx(p_out_r - p_in_r, abs=1e-9 * p_in_r)


def test_unit_modulus_receive_surface_makes_pair_vacuous(channel_factory):
    channels = channel_factory(2, 2, 3, 4, seed=3)
    gamma_r = np.exp(1j * np.linspace(0.0, 2.0, 4))
    sub = build_gamma_t_subproblem(channels, gamma_r, np.eye(2), 1.0)
    e1, e2 = sub.extra_pair
    assert convexify_homogeneous(e1, e2, np.ones(3)) is None
    gamma = np.array([0.3, -1.0j, 0.7])
    assert abs(sub.extra_value(gamma)) <= 1e-9 * np.linalg.norm(e2, 2)


def test_subproblem_rejects_wrong_length(channel_factory):
    channels = channel_factory(2, 2, 3, 4, seed=4)
    with pytest.raises(DimensionError):
        build_gamma_r_subproblem(channels, np.ones(4), np.eye(2), 1.0)


def test_single_element_surface_reaches_unit_modulus(channel_factory):
    channels = channel_factory(2, 2, 1, 1, seed=5)
    sub = build_gamma_r_subproblem(channels, np.ones(1), np.eye(2), 1.0)
    gamma, report = optimize_gamma_r(sub, np.array([0.5 + 0.0j]), SolverOptions())
    assert abs(gamma[0]) == pytest.approx(1.0, rel=1e-4)
    assert report.is_nondecreasing()


def test_transmit_surface_step_improves_and_stays_feasible(channel_factory):
    channels = channel_factory(2, 2, 3, 4, seed=11)
    surfaces = random_surfaces(3, 4, 11)
    q_mat = random_covariance(2, 11)
    gamma_t, report = optimize_gamma_t(
        channels, surfaces.gamma_R, q_mat, surfaces.gamma_T, 1.0, SolverOptions(max_sfp_iters=20)
    )
    updated = SurfaceState(gamma_t, surfaces.gamma_R)
    assert report.is_nondecreasing()
    before = capacity(channels, surfaces, q_mat, 1.0, 1.0)
    assert capacity(channels, updated, q_mat, 1.0, 1.0) >= before * (1.0 - 1e-12)
    assert check_reflection(channels, updated, q_mat, tol=1e-6).feasible
    # the returned vector is the last accepted iterate itself
    assert capacity(channels, updated, q_mat, 1.0, 1.0) == pytest.approx(report.objective_trace[-1], rel=1e-9)
    assert "rank_ratio" not in report.diagnostics


def test_capacity_covariance_matches_water_filling(channel_factory, unit_power_model):
    channels = channel_factory(3, 2, 3, 4, seed=6)
    surfaces = SurfaceState.unit(3, 4)
    p_max = 3.0
    q_mat, report = optimize_Q(channels, surfaces, unit_power_model, p_max, 1.0, 1.0, mode=Mode.CAPACITY)
    k = channels.composite(surfaces)
    expected = water_filling_capacity(k.conj().T @ k, 1.0, p_max)
    assert capacity(channels, surfaces, q_mat, 1.0, 1.0) == pytest.approx(expected, abs=1e-6)
    assert np.trace(q_mat).real <= p_max * (1.0 + 1e-8)
    assert report.is_nondecreasing()


def test_ee_covariance_single_antenna_matches_stationary_power(channel_factory, unit_power_model):
    channels = channel_factory(1, 1, 2, 3, seed=7)
    surfaces = SurfaceState.unit(2, 3)
    a = abs(channels.composite(surfaces)[0, 0]) ** 2
    expected = optimize_power_siso(a, unit_power_model, 10.0, 1.0, 2, 3)
    q_mat, report = optimize_Q(channels, surfaces, unit_power_model, 10.0, 1.0, 1.0)
    assert np.trace(q_mat).real == pytest.approx(expected, rel=1e-3)
    assert report.certificate <= 1e-8


def test_zero_composite_channel_gives_zero_covariance(channel_factory, unit_power_model):
    channels = channel_factory(2, 2, 2, 3, seed=8)
    surfaces = SurfaceState(np.ones(2), np.zeros(3))
    q_mat, report = optimize_Q(channels, surfaces, unit_power_model, 1.0, 1.0, 1.0)
    assert not np.any(q_mat)
    assert any("composite channel is zero" in note for note in report.notes)


def test_alternation_is_monotone_and_feasible(channel_factory, unit_power_model):
    channels = channel_factory(2, 2, 2, 3, seed=9)
    p_max = 2.0
    opts = SolverOptions(max_iters=4, max_sfp_iters=10, sfp_tol=1e-6)
    solution = alternate_multi_stream(channels, unit_power_model, p_max, 1.0, 1.0, opts)
    assert solution.report.is_nondecreasing(slack=1e-12)
    assert solution.power <= p_max * (1.0 + 1e-6)
    assert check_reflection(channels, solution.surfaces, solution.Q, tol=1e-6).feasible
    assert solution.ee >= solution.report.objective_trace[0]
    logger.info(f"Multi-stream: {solution}")


@pytest.mark.parametrize("seed", range(20))
def test_single_antenna_matches_siso(channel_factory, unit_power_model, seed):
    channels = channel_factory(1, 1, 2, 2, seed=seed)
    siso = solve_siso(channels, 1.0, 1.0, unit_power_model, 10.0)
    solution = alternate_multi_stream(channels, unit_power_model, 10.0, 1.0, 1.0, SolverOptions())
    assert solution.ee == pytest.approx(siso.ee, rel=1e-4)
    assert solution.ee <= siso.ee * (1.0 + 1e-6)
    assert solution.power == pytest.approx(siso.power, rel=1e-2)


def test_closed_form_restart_meets_reflection_with_equality(channel_factory):
    channels = channel_factory(2, 2, 2, 3, seed=12)
    q = np.array([1.0, 0.5 - 0.5j])
    q_mat = np.outer(q, q.conj())
    report = SolveReport([0.0], 0, Termination.MAX_ITERS)
    surfaces = closed_form_restart(channels, q_mat, report, 1e-8)
    assert surfaces is not None
    p_in_t, p_out_t, p_in_r, p_out_r = surface_powers(channels, surfaces, q_mat)
    assert p_out_t == pytest.approx(p_in_t, rel=1e-8)
    assert p_out_r == pytest.approx(p_in_r, rel=1e-8)
    unit = SurfaceState.unit(2, 3)
    received = np.linalg.norm(channels.composite(surfaces) @ q) ** 2
    assert received >= np.linalg.norm(channels.composite(unit) @ q) ** 2 * (1.0 - 1e-9)


def test_closed_form_restart_unavailable(channel_factory):
    report = SolveReport([0.0], 0, Termination.MAX_ITERS)
    channels = channel_factory(2, 2, 2, 3, seed=13)
    assert closed_form_restart(channels, np.zeros((2, 2)), report, 1e-8) is None
    wide = channel_factory(2, 2, 4, 3, seed=13)
    assert closed_form_restart(wide, np.eye(2), report, 1e-8) is None
    assert any("closed-form surface restart unavailable" in note for note in report.notes)


def test_capacity_alternation_improves_on_start(channel_factory, unit_power_model):
    channels = channel_factory(2, 2, 2, 3, seed=10)
    opts = SolverOptions(max_iters=3, max_sfp_iters=10)
    solution = alternate_multi_stream(channels, unit_power_model, 1.0, 1.0, 1.0, opts, Mode.CAPACITY)
    start = capacity(channels, SurfaceState.unit(2, 3), 0.5 * np.eye(2), 1.0, 1.0)
    assert solution.capacity >= start * (1.0 - 1e-12)
    assert solution.power == pytest.approx(1.0, rel=1e-4)
