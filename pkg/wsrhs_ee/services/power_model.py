"""
Power Model Service for WsRHS Energy Efficiency.

This module evaluates the objective and constraints of the EE problem:
capacity, surface input and output powers, total consumed power, energy
efficiency and the global reflection feasibility check.
"""

import logging
from typing import Dict, List, Tuple

import numpy as np

from wsrhs_ee.models.scenario import PowerModel
from wsrhs_ee.models.state import ChannelSet, SurfaceState, TransmitState, as_transmit_state
from wsrhs_ee.services.numerics import logdet_psd
from wsrhs_ee.utils.errors import DimensionError, DomainError, ModelError

logger = logging.getLogger(__name__)

REFLECTION_TOL = 1e-8
POWER_FLOOR = 1e-15


def _signal_factor(channels: ChannelSet, surfaces: SurfaceState, tx: TransmitState) -> np.ndarray:
    """G Γ_R C Γ_T H F with Q = F Fᴴ."""
    if tx.n_tx != channels.n_tx:
        raise DimensionError(f"transmit state has {tx.n_tx} antennas, channels have {channels.n_tx}")
    return channels.composite(surfaces) @ tx.factor()


def capacity(
    channels: ChannelSet,
    surfaces: SurfaceState,
    tx,
    noise_power: float,
    bandwidth: float,
) -> float:
    """
    Link capacity B·log₂|I + (1/σ²)·G Γ_R C Γ_T H Q Hᴴ Γ_Tᴴ Cᴴ Γ_Rᴴ Gᴴ| in bits/s.

    Args:
        channels: Channel realization
        surfaces: Reflection vectors
        tx: TransmitState, or raw Q / q / p
        noise_power: σ² in Watts
        bandwidth: B in Hz

    Returns:
        Capacity in bits/s
    """
    if not noise_power > 0:
        raise DomainError(f"noise power must be > 0, got {noise_power}")
    f = _signal_factor(channels, surfaces, as_transmit_state(tx))
    # Sylvester: |I + F Fᴴ/σ²| = |I + Fᴴ F/σ²|, the smaller of the two
    gram = f.conj().T @ f if f.shape[1] <= f.shape[0] else f @ f.conj().T
    return bandwidth * logdet_psd(np.eye(gram.shape[0]) + gram / noise_power)


def surface_powers(channels: ChannelSet, surfaces: SurfaceState, tx) -> Tuple[float, float, float, float]:
    """
    Input and output powers of both surfaces.

    Returns:
        Tuple of (P_in,T, P_out,T, P_in,R, P_out,R) in Watts
    """
    tx = as_transmit_state(tx)
    if tx.n_tx != channels.n_tx:
        raise DimensionError(f"transmit state has {tx.n_tx} antennas, channels have {channels.n_tx}")
    surfaces.check_shapes(channels)
    incident_t = channels.H @ tx.factor()
    reflected_t = surfaces.gamma_T[:, None] * incident_t
    incident_r = channels.C @ reflected_t
    reflected_r = surfaces.gamma_R[:, None] * incident_r

    def energy(x: np.ndarray) -> float:
        return float(np.sum(np.abs(x) ** 2))

    return energy(incident_t), energy(reflected_t), energy(incident_r), energy(reflected_r)


def total_power(tx, pm: PowerModel, m_tx: int, m_rx: int, n_tx: int, n_rx: int) -> float:
    """Consumed power μ·tr(Q) + P_c in Watts."""
    return pm.mu * as_transmit_state(tx).trace() + pm.static_power(m_tx, m_rx, n_tx, n_rx)


def energy_efficiency(
    channels: ChannelSet,
    surfaces: SurfaceState,
    tx,
    noise_power: float,
    bandwidth: float,
    pm: PowerModel,
) -> float:
    """
    Energy efficiency in bits/Joule.

    Raises:
        ModelError: if the consumed power is zero
    """
    tx = as_transmit_state(tx)
    denom = total_power(tx, pm, channels.m_tx, channels.m_rx, channels.n_tx, channels.n_rx)
    if not denom > 0:
        raise ModelError("total consumed power is zero; EE is undefined")
    return capacity(channels, surfaces, tx, noise_power, bandwidth) / denom


class ReflectionReport:
    """Residuals of the two global reflection constraints."""

    def __init__(self, powers: Tuple[float, float, float, float], tol: float = REFLECTION_TOL):
        """
        Initialize the report.

        Args:
            powers: (P_in,T, P_out,T, P_in,R, P_out,R) in Watts
            tol: Relative tolerance
        """
        self.p_in_T, self.p_out_T, self.p_in_R, self.p_out_R = powers
        self.tol = tol
        self.residual_T = self.p_out_T - self.p_in_T
        self.residual_R = self.p_out_R - self.p_in_R

    @property
    def feasible_T(self) -> bool:
        return self.residual_T <= self.tol * max(self.p_in_T, POWER_FLOOR)

    @property
    def feasible_R(self) -> bool:
        return self.residual_R <= self.tol * max(self.p_in_R, POWER_FLOOR)

    @property
    def feasible(self) -> bool:
        """Both constraints hold within tolerance."""
        return self.feasible_T and self.feasible_R

    @property
    def residuals(self) -> List[float]:
        return [self.residual_T, self.residual_R]

    def to_dict(self) -> Dict:
        return {
            "p_in_T": self.p_in_T,
            "p_out_T": self.p_out_T,
            "p_in_R": self.p_in_R,
            "p_out_R": self.p_out_R,
            "residual_T": self.residual_T,
            "residual_R": self.residual_R,
            "feasible": self.feasible,
        }

    def __repr__(self) -> str:
        return f"<ReflectionReport feasible={self.feasible} residuals=({self.residual_T:.3e}, {self.residual_R:.3e})>"


def check_reflection(channels: ChannelSet, surfaces: SurfaceState, tx, tol: float = REFLECTION_TOL) -> ReflectionReport:
    """
    Check P_out ≤ P_in at both surfaces.

    Args:
        channels: Channel realization
        surfaces: Reflection vectors
        tx: Transmit state
        tol: Relative tolerance, with an absolute floor of 1e−15 W on P_in

    Returns:
        ReflectionReport
    """
    report = ReflectionReport(surface_powers(channels, surfaces, tx), tol)
    if not report.feasible:
        logger.warning(f"Global reflection constraint violated: {report}")
    return report
