"""
SISO Solver Service for WsRHS Energy Efficiency.

This module solves the single-antenna EE problem in closed form: the surface
reflection vectors that maximize the end-to-end gain under the global
reflection constraints, and the transmit power that maximizes the
pseudo-concave EE ratio.
"""

import logging
import math
from typing import Dict, Optional

import numpy as np
from scipy.optimize import brentq

from wsrhs_ee.models.report import Mode, SolveReport, Termination
from wsrhs_ee.models.scenario import PowerModel
from wsrhs_ee.models.state import ChannelSet, SurfaceState, TransmitState
from wsrhs_ee.services.numerics import left_pseudo_inverse, principal_eigpair
from wsrhs_ee.services.power_model import capacity, energy_efficiency
from wsrhs_ee.utils.arrays import as_complex_vector
from wsrhs_ee.utils.errors import DegenerateChannelError, DimensionError, ModelError

logger = logging.getLogger(__name__)

DARK_ELEMENT_TOL = 1e-12  # relative modulus below which an element is switched off
ROOT_RTOL = 1e-12


def _safe_ratio(num: np.ndarray, den: np.ndarray, label: str, report: Optional[SolveReport]) -> np.ndarray:
    """Entrywise num/den with dark elements (|den| < 1e−12·max) set to zero."""
    mags = np.abs(den)
    peak = float(mags.max()) if mags.size else 0.0
    dark = mags < DARK_ELEMENT_TOL * peak if peak > 0 else np.ones(den.shape, dtype=bool)
    out = np.zeros(den.shape, dtype=complex)
    out[~dark] = num[~dark] / den[~dark]
    if np.any(dark):
        note = f"{int(dark.sum())} {label} element(s) have near-zero illumination; coefficient set to 0"
        logger.warning(note)
        if report is not None:
            report.add_note(note)
    return out


def recover_surfaces(
    h: np.ndarray,
    x_bar: np.ndarray,
    y_bar: np.ndarray,
    c_pinv: np.ndarray,
    report: Optional[SolveReport] = None,
) -> SurfaceState:
    """
    Reflection vectors realizing the target fields x̄ = CΓ_T h and ȳ = Γ_R x̄.

    Args:
        h: Field incident on the transmit surface
        x_bar: Target field incident on the receive surface
        y_bar: Target field reflected by the receive surface
        c_pinv: Left pseudo-inverse of C
        report: Optional report receiving regularization notices

    Returns:
        SurfaceState with γ_T = (C⁺x̄)/h and γ_R = ȳ/x̄ entrywise
    """
    gamma_t = _safe_ratio(c_pinv @ x_bar, h, "transmit-surface", report)
    gamma_r = _safe_ratio(y_bar, x_bar, "receive-surface", report)
    surfaces = SurfaceState(gamma_t, gamma_r)
    if surfaces.max_modulus() > 1.0 + 1e-12 and report is not None:
        report.add_note(f"max |γ_i| = {surfaces.max_modulus():.4g} exceeds 1 (global constraints only)")
    return surfaces


def optimize_surfaces_siso(h, g, C, report: Optional[SolveReport] = None) -> SurfaceState:
    """
    Closed-form surfaces maximizing |gᴴΓ_R C Γ_T h|².

    The optimum puts x̄ = ‖h‖√λ_max·u_max(CCᴴ) on the receive surface and
    reflects ȳ = ‖h‖√λ_max·g/‖g‖ towards the receiver; both reflection
    constraints hold with equality.

    Args:
        h: Transmit-surface channel (length M_T)
        g: Receive-surface channel (length M_R), the receiver sees gᴴy
        C: Surface-to-surface matrix, M_R × M_T with M_T ≤ M_R
        report: Optional report receiving regularization notices

    Returns:
        SurfaceState
    """
    h = as_complex_vector(h, "h")
    g = as_complex_vector(g, "g")
    C = np.asarray(C, dtype=complex)
    if C.shape != (g.size, h.size):
        raise DimensionError(f"C must be {g.size}x{h.size}, got {C.shape}")
    g_norm = float(np.linalg.norm(g))
    h_norm = float(np.linalg.norm(h))
    if g_norm == 0.0 or h_norm == 0.0:
        raise DegenerateChannelError("h or g is identically zero")

    c_pinv = left_pseudo_inverse(C)
    lam, u = principal_eigpair(C @ C.conj().T)
    amplitude = h_norm * math.sqrt(lam)
    x_bar = amplitude * u
    y_bar = amplitude * g / g_norm
    return recover_surfaces(h, x_bar, y_bar, c_pinv, report)


def _stationarity(p: float, a: float, mu: float, p_c: float) -> float:
    """Sign-carrying derivative numerator of log₂(1+ap)/(μp+P_c)."""
    return a * (mu * p + p_c) / (math.log(2.0) * (1.0 + a * p)) - mu * math.log2(1.0 + a * p)


def optimize_power_siso(
    a: float,
    pm: PowerModel,
    p_max: float,
    bandwidth: float,
    m_tx: int,
    m_rx: int,
    mode: Mode = Mode.EE,
) -> float:
    """
    EE-optimal transmit power min(P_max, p*).

    Args:
        a: Effective gain |gᴴΓ_R C Γ_T h|²/σ² in 1/W
        pm: Power model; P_c counts one chain per side and the given surface sizes
        p_max: Power budget in Watts
        bandwidth: B in Hz (p* does not depend on it)
        m_tx: Transmit surface elements counted in P_c
        m_rx: Receive surface elements counted in P_c
        mode: EE, or Capacity for full power

    Returns:
        p̄ in Watts
    """
    if not a > 0:
        raise DegenerateChannelError(f"effective gain must be > 0, got {a}")
    if not p_max > 0:
        raise ModelError(f"P_max must be > 0, got {p_max}")
    if mode == Mode.CAPACITY or pm.mu == 0.0:
        return p_max

    p_c = pm.static_power(m_tx, m_rx, 1, 1)
    if not p_c > 0:
        raise ModelError("EE mode needs a positive static power; the ratio peaks at p → 0")

    hi = 1.0 / a
    while _stationarity(hi, a, pm.mu, p_c) > 0.0:
        hi *= 2.0
    p_star = brentq(_stationarity, 0.0, hi, args=(a, pm.mu, p_c), xtol=1e-300, rtol=ROOT_RTOL, maxiter=1000)
    logger.debug(
        f"Stationary power p* = {p_star:.6e} W (a = {a:.3e}, P_c = {p_c:.3e} W, "
        f"EE = {bandwidth * math.log2(1.0 + a * p_star) / (pm.mu * p_star + p_c):.6e} bit/J)"
    )
    return min(p_max, p_star)


class SisoSolution:
    """Closed-form SISO optimum."""

    def __init__(
        self,
        surfaces: SurfaceState,
        power: float,
        effective_gain: float,
        ee: float,
        capacity: float,
        report: SolveReport,
    ):
        """
        Initialize a SISO solution.

        Args:
            surfaces: Optimal reflection vectors
            power: p̄ in Watts
            effective_gain: a in 1/W
            ee: Energy efficiency in bits/J
            capacity: Capacity in bits/s
            report: Notices and the single-point objective trace
        """
        self.surfaces = surfaces
        self.power = power
        self.effective_gain = effective_gain
        self.ee = ee
        self.capacity = capacity
        self.report = report

    @property
    def outer_iterations(self) -> int:
        return 0

    def to_dict(self) -> Dict:
        return {
            "power": self.power,
            "effective_gain": self.effective_gain,
            "ee": self.ee,
            "capacity": self.capacity,
            "surfaces": self.surfaces.to_dict(),
            "report": self.report.to_dict(),
        }

    def __repr__(self) -> str:
        return f"<SisoSolution p={self.power:.4g} W ee={self.ee:.6g} bit/J>"


def solve_siso(
    channels: ChannelSet,
    noise_power: float,
    bandwidth: float,
    pm: PowerModel,
    p_max: float,
    mode: Mode = Mode.EE,
) -> SisoSolution:
    """
    Global optimum of the SISO EE (or capacity) problem.

    Args:
        channels: Channel set with N_T = N_R = 1
        noise_power: σ² in Watts
        bandwidth: B in Hz
        pm: Power model
        p_max: Power budget in Watts
        mode: EE or Capacity

    Returns:
        SisoSolution
    """
    if channels.n_tx != 1 or channels.n_rx != 1:
        raise DimensionError(f"SISO solver needs N_T = N_R = 1, got {channels.n_tx}x{channels.n_rx}")
    report = SolveReport(termination=Termination.CONVERGED)
    h = channels.H[:, 0]
    g = channels.G[0, :].conj()
    surfaces = optimize_surfaces_siso(h, g, channels.C, report)

    gain = abs(np.vdot(g, surfaces.gamma_R * (channels.C @ (surfaces.gamma_T * h)))) ** 2 / noise_power
    power = optimize_power_siso(gain, pm, p_max, bandwidth, channels.m_tx, channels.m_rx, mode)
    tx = TransmitState.scalar_power(power)
    ee = energy_efficiency(channels, surfaces, tx, noise_power, bandwidth, pm)
    cap = capacity(channels, surfaces, tx, noise_power, bandwidth)
    report.objective_trace = [ee]
    logger.info(f"SISO solve: p̄ = {power:.4e} W, EE = {ee:.6e} bit/J, C = {cap:.6e} bit/s")
    return SisoSolution(surfaces, power, gain, ee, cap, report)
