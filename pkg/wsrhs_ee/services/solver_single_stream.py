"""
Single-Stream Solver Service for WsRHS Energy Efficiency.

This module maximizes the EE of a rank-one MIMO transmission by alternating
two steps: closed-form surfaces for a fixed beamvector, and sequential
fractional programming (SFP) over the beamvector for fixed surfaces. Each SFP
iteration maximizes a concave-over-convex surrogate, tight at the current
point, with Dinkelbach's algorithm.
"""

import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np

from wsrhs_ee.models.report import Deadline, Mode, SolveReport, SolverOptions, Termination
from wsrhs_ee.models.scenario import PowerModel
from wsrhs_ee.models.state import ChannelSet, SurfaceState, TransmitState
from wsrhs_ee.services.convex_core import (
    LogAffine,
    Quadratic,
    QuadraticForm,
    convexify_homogeneous,
    dinkelbach,
    quadratic_feasible_set,
    to_complex,
    to_real,
)
from wsrhs_ee.services.numerics import left_pseudo_inverse, principal_eigpair
from wsrhs_ee.services.power_model import capacity, check_reflection, energy_efficiency
from wsrhs_ee.services.solver_siso import recover_surfaces
from wsrhs_ee.utils.errors import DegenerateChannelError, InfeasibleError, ModelError

logger = logging.getLogger(__name__)

LOG_DOMAIN_FLOOR = 1e-12


def objective_power_model(pm: PowerModel, mode: Mode) -> PowerModel:
    """
    Power model the solvers optimize against.

    Capacity mode drops the transmit power cost and uses a unit static power,
    so the optimized ratio equals the capacity.
    """
    if mode == Mode.CAPACITY:
        return PowerModel(mu=0.0, system_overhead=1.0)
    return pm


def optimize_surfaces_given_q(q, channels: ChannelSet, report: Optional[SolveReport] = None) -> SurfaceState:
    """
    Closed-form surfaces maximizing ‖G Γ_R C Γ_T H q‖² for a fixed beamvector.

    Args:
        q: Beamvector (length N_T)
        channels: Channel set with M_T ≤ M_R
        report: Optional report receiving regularization notices

    Returns:
        SurfaceState meeting both reflection constraints with equality
    """
    q = np.asarray(q, dtype=complex).ravel()
    h = channels.H @ q
    h_norm = float(np.linalg.norm(h))
    if h_norm == 0.0:
        raise DegenerateChannelError("Hq is zero; the beamvector does not illuminate the transmit surface")

    c_pinv = left_pseudo_inverse(channels.C)
    lam_c, u_c = principal_eigpair(channels.C @ channels.C.conj().T)
    if channels.n_rx == 1:
        g = channels.G[0, :].conj()
        u_g = g / np.linalg.norm(g)
    else:
        _, u_g = principal_eigpair(channels.G.conj().T @ channels.G)
    amplitude = h_norm * math.sqrt(lam_c)
    return recover_surfaces(h, amplitude * u_c, amplitude * u_g, c_pinv, report)


def _reflection_matrices(channels: ChannelSet, surfaces: SurfaceState) -> List[Tuple[np.ndarray, np.ndarray]]:
    """(A, L) pairs with P_out − P_in = qᴴ(A − L)q for the two surfaces."""
    th = surfaces.gamma_T[:, None] * channels.H
    cth = channels.C @ th
    rcth = surfaces.gamma_R[:, None] * cth
    return [
        (th.conj().T @ th, channels.H.conj().T @ channels.H),
        (rcth.conj().T @ rcth, cth.conj().T @ cth),
    ]


def _true_ratio(q: np.ndarray, w: np.ndarray, mu: float, p_c: float) -> float:
    """log₂(1 + qᴴWq)/(μ‖q‖² + P_c)."""
    snr = float(np.vdot(q, w @ q).real)
    return math.log2(1.0 + max(snr, 0.0)) / (mu * float(np.vdot(q, q).real) + p_c)


def sfp_beamforming(
    channels: ChannelSet,
    surfaces: SurfaceState,
    pm: PowerModel,
    p_max: float,
    noise_power: float,
    bandwidth: float,
    q0,
    opts: Optional[SolverOptions] = None,
) -> Tuple[np.ndarray, SolveReport]:
    """
    SFP over the beamvector for fixed surfaces.

    Each iteration replaces qᴴWq by its tangent minorant at q₀ and the
    reflection constraints by their tangent convexification, then solves the
    concave-over-convex surrogate with Dinkelbach's algorithm. The beamvector is
    scaled as q = √P_max·z with ‖z‖ ≤ 1.

    Args:
        channels: Channel set
        surfaces: Fixed reflection vectors
        pm: Power model
        p_max: Power budget in Watts
        noise_power: σ² in Watts
        bandwidth: B in Hz
        q0: Feasible start beamvector
        opts: Solver options

    Returns:
        Tuple of (q, SolveReport) with the EE trace in bits/J
    """
    opts = opts or SolverOptions()
    p_c = pm.static_power(channels.m_tx, channels.m_rx, channels.n_tx, channels.n_rx)
    if not p_c > 0:
        raise ModelError("static power must be positive for the beam ratio to be bounded")
    scale = math.sqrt(p_max)
    m_mat = channels.composite(surfaces) / math.sqrt(noise_power)
    w = m_mat.conj().T @ m_mat
    pairs = _reflection_matrices(channels, surfaces)
    denominator = Quadratic(pm.mu * p_max * np.eye(2 * channels.n_tx), None, p_c)

    q = np.asarray(q0, dtype=complex).ravel()
    ratio = _true_ratio(q, w, pm.mu, p_c)
    report = SolveReport([bandwidth * ratio], 0, Termination.MAX_ITERS)
    for it in range(1, opts.max_sfp_iters + 1):
        z0 = q / scale
        wq0 = w @ q
        a = 2.0 * scale * to_real(wq0)
        a0 = 1.0 - float(np.vdot(q, wq0).real)
        numerator = LogAffine(a, a0)
        quads: List[QuadraticForm] = []
        for big_a, big_l in pairs:
            qf = convexify_homogeneous(big_a, big_l, z0)
            if qf is not None:
                quads.append(qf)
        domain = (-a[None, :], np.array([a0 - LOG_DOMAIN_FLOOR]))
        fs = quadratic_feasible_set(channels.n_tx, quads, 1.0, domain)

        try:
            x, inner = dinkelbach(numerator, denominator, fs, to_real(z0), opts)
        except InfeasibleError:
            inner = SolveReport(termination=Termination.INFEASIBLE)
        if inner.termination == Termination.INFEASIBLE:
            report.add_note("beam surrogate has no interior point; kept the incumbent beamvector")
            report.termination = Termination.CONVERGED
            break

        q_new = scale * to_complex(x)
        ratio_new = _true_ratio(q_new, w, pm.mu, p_c)
        report.iterations = it
        report.certificate = inner.certificate
        report.kkt_residual = inner.kkt_residual
        if ratio_new < ratio:
            report.add_note("rejected a beam step that lowered the objective")
            logger.debug(f"Beam SFP iteration {it}: rejected {ratio_new:.12g} < {ratio:.12g}")
            report.termination = Termination.CONVERGED
            break
        change = ratio_new - ratio
        q, ratio = q_new, ratio_new
        report.objective_trace.append(bandwidth * ratio)
        logger.debug(f"Beam SFP iteration {it}: EE = {bandwidth * ratio:.12g} bit/J")
        if change <= opts.sfp_tol * abs(ratio):
            report.termination = Termination.CONVERGED
            break
    return q, report


class SingleStreamSolution:
    """Result of the single-stream alternating maximization."""

    def __init__(
        self,
        surfaces: SurfaceState,
        q: np.ndarray,
        ee: float,
        capacity: float,
        report: SolveReport,
    ):
        """
        Initialize a single-stream solution.

        Args:
            surfaces: Final reflection vectors
            q: Final beamvector
            ee: Energy efficiency in bits/J under the true power model
            capacity: Capacity in bits/s
            report: Outer-loop trace of the optimized objective
        """
        self.surfaces = surfaces
        self.q = q
        self.ee = ee
        self.capacity = capacity
        self.report = report

    @property
    def outer_iterations(self) -> int:
        return self.report.iterations

    @property
    def power(self) -> float:
        return float(np.vdot(self.q, self.q).real)

    def to_dict(self) -> Dict:
        return {
            "power": self.power,
            "ee": self.ee,
            "capacity": self.capacity,
            "surfaces": self.surfaces.to_dict(),
            "q": TransmitState.beamvector(self.q).to_dict()["q"],
            "report": self.report.to_dict(),
        }

    def __repr__(self) -> str:
        return f"<SingleStreamSolution power={self.power:.4g} W ee={self.ee:.6g} bit/J>"


def initial_beamvector(channels: ChannelSet, p_max: float) -> np.ndarray:
    """√P_max times the principal right singular direction of H."""
    _, v = principal_eigpair(channels.H.conj().T @ channels.H)
    return math.sqrt(p_max) * v


def alternate_single_stream(
    channels: ChannelSet,
    pm: PowerModel,
    p_max: float,
    noise_power: float,
    bandwidth: float,
    opts: Optional[SolverOptions] = None,
    mode: Mode = Mode.EE,
) -> SingleStreamSolution:
    """
    Alternate closed-form surfaces and beam SFP until the objective settles.

    Args:
        channels: Channel set
        pm: Power model
        p_max: Power budget in Watts
        noise_power: σ² in Watts
        bandwidth: B in Hz
        opts: Solver options
        mode: EE or Capacity

    Returns:
        SingleStreamSolution
    """
    opts = opts or SolverOptions()
    deadline = Deadline(opts.time_limit_s)
    pm_opt = objective_power_model(pm, mode)

    def objective(s: SurfaceState, beam: np.ndarray) -> float:
        return energy_efficiency(channels, s, TransmitState.beamvector(beam), noise_power, bandwidth, pm_opt)

    q = initial_beamvector(channels, p_max)
    surfaces = SurfaceState.unit(channels.m_tx, channels.m_rx)
    value = objective(surfaces, q)
    report = SolveReport([value], 0, Termination.MAX_ITERS)

    for it in range(1, opts.max_iters + 1):
        deadline.check("single-stream alternation")
        candidate = optimize_surfaces_given_q(q, channels, report)
        candidate_value = objective(candidate, q)
        if candidate_value >= value:
            surfaces, surface_value = candidate, candidate_value
        else:
            report.add_note("rejected a surface step that lowered the objective")
            surface_value = value

        q_new, beam_report = sfp_beamforming(channels, surfaces, pm_opt, p_max, noise_power, bandwidth, q, opts)
        for note in beam_report.notes:
            report.add_note(note)
        if beam_report.certificate is not None:
            report.certificate = beam_report.certificate
        new_value = objective(surfaces, q_new)
        if new_value >= surface_value:
            q = q_new
        else:
            new_value = surface_value

        change = new_value - value
        value = new_value
        report.objective_trace.append(value)
        report.iterations = it
        logger.debug(f"Single-stream iteration {it}: objective = {value:.12g}")
        if abs(change) <= opts.sfp_tol * abs(value):
            report.termination = Termination.CONVERGED
            break

    tx = TransmitState.beamvector(q)
    reflection = check_reflection(channels, surfaces, tx)
    report.constraint_residuals = [float(np.vdot(q, q).real) - p_max] + reflection.residuals
    ee = energy_efficiency(channels, surfaces, tx, noise_power, bandwidth, pm)
    cap = capacity(channels, surfaces, tx, noise_power, bandwidth)
    logger.info(
        f"Single-stream solve: {report.iterations} iterations ({report.termination.value}), "
        f"EE = {ee:.6e} bit/J, C = {cap:.6e} bit/s"
    )
    return SingleStreamSolution(surfaces, q, ee, cap, report)
