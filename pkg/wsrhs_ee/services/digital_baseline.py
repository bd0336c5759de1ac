"""
Digital Baseline Service for WsRHS Energy Efficiency.

This module solves the EE problem for a fully digital link without surfaces:
the two antenna arrays see a direct Rician channel H_d, the optimal covariance
is diagonal in the eigenbasis of H_dᴴH_d, and only the eigenmode powers are
optimized.
"""

import logging
from typing import Dict, Optional

import numpy as np

from wsrhs_ee.models.report import Mode, SolveReport, SolverOptions, Termination
from wsrhs_ee.models.scenario import PowerModel
from wsrhs_ee.services.convex_core import Affine, FeasibleSet, SeparableLog, dinkelbach
from wsrhs_ee.services.numerics import hermitian_eig
from wsrhs_ee.utils.arrays import as_complex_matrix
from wsrhs_ee.utils.errors import DomainError, ModelError

logger = logging.getLogger(__name__)

MODE_TRUNCATION = 1e-12

DIRECT_CHANNEL_NOTE = (
    "DigitalOnly uses a direct Rician channel between the two arrays with the scenario's "
    "Rice factor and the path loss at the surface separation distance"
)


class DigitalSolution:
    """Eigenmode power allocation of the surface-free link."""

    def __init__(self, Q: np.ndarray, powers: np.ndarray, ee: float, capacity: float, report: SolveReport):
        """
        Initialize a digital solution.

        Args:
            Q: Transmit covariance
            powers: Power per active eigenmode in Watts, strongest mode first
            ee: Energy efficiency in bits/J
            capacity: Capacity in bits/s
            report: Dinkelbach trace in bits/J
        """
        self.Q = Q
        self.powers = powers
        self.ee = ee
        self.capacity = capacity
        self.report = report

    @property
    def outer_iterations(self) -> int:
        return self.report.iterations

    @property
    def power(self) -> float:
        return float(np.sum(self.powers))

    def to_dict(self) -> Dict:
        return {
            "power": self.power,
            "mode_powers": [float(p) for p in self.powers],
            "ee": self.ee,
            "capacity": self.capacity,
            "report": self.report.to_dict(),
        }

    def __repr__(self) -> str:
        return f"<DigitalSolution power={self.power:.4g} W ee={self.ee:.6g} bit/J>"


def solve_digital(
    direct_channel: np.ndarray,
    noise_power: float,
    bandwidth: float,
    pm: PowerModel,
    p_max: float,
    opts: Optional[SolverOptions] = None,
    mode: Mode = Mode.EE,
) -> DigitalSolution:
    """
    Optimal covariance of the digital link.

    Over y = p/P_max with y ≥ 0 and Σy ≤ 1, EE mode maximizes
    Σ log₂(1 + g_i P_max y_i)/(μP_max Σy + P_c) with Dinkelbach; Capacity mode
    maximizes the numerator alone, which is water-filling.

    Args:
        direct_channel: H_d, N_R × N_T
        noise_power: σ² in Watts
        bandwidth: B in Hz
        pm: Power model; P_c counts the RF chains only
        p_max: Power budget in Watts
        opts: Solver options
        mode: EE or Capacity

    Returns:
        DigitalSolution
    """
    opts = opts or SolverOptions()
    h_d = as_complex_matrix(direct_channel, "H_d")
    if not noise_power > 0:
        raise DomainError(f"noise power must be > 0, got {noise_power}")
    n_rx, n_tx = h_d.shape
    p_c = pm.static_power(0, 0, n_tx, n_rx)

    eig = hermitian_eig(h_d.conj().T @ h_d)
    lead = float(eig.eigenvalues[0]) if len(eig) else 0.0
    keep = eig.eigenvalues > MODE_TRUNCATION * lead if lead > 0 else np.zeros(len(eig), dtype=bool)
    gains = np.asarray(eig.eigenvalues[keep], dtype=float) / noise_power
    vectors = eig.eigenvectors[:, keep]
    r = gains.size
    report = SolveReport(termination=Termination.CONVERGED)
    if r == 0:
        report.add_note("direct channel is zero; Q = 0")
        ee = 0.0 if p_c > 0 else float("nan")
        return DigitalSolution(np.zeros((n_tx, n_tx), dtype=complex), np.zeros(0), ee, 0.0, report)

    a = np.vstack([-np.eye(r), np.ones((1, r))])
    b = np.concatenate([np.zeros(r), [1.0]])
    fs = FeasibleSet(r, (a, b))
    numerator = SeparableLog(gains * p_max)
    y0 = np.full(r, 0.5 / r)

    if mode == Mode.EE and pm.mu > 0:
        if not p_c > 0:
            raise ModelError("EE mode needs a positive static power")
        y, inner = dinkelbach(numerator, Affine(np.full(r, pm.mu * p_max), p_c), fs, y0, opts)
        report.objective_trace = [bandwidth * v for v in inner.objective_trace]
        report.iterations = inner.iterations
        report.termination = inner.termination
        report.certificate = inner.certificate
        report.kkt_residual = inner.kkt_residual
    else:
        y, gap, steps = fs.maximize(numerator, y0, opts)
        report.iterations = steps
        report.kkt_residual = gap

    powers = p_max * np.clip(y, 0.0, None)
    q_mat = (vectors * powers) @ vectors.conj().T
    cap = bandwidth * float(np.sum(np.log2(1.0 + gains * powers)))
    denom = pm.mu * float(np.sum(powers)) + p_c
    if not denom > 0:
        raise ModelError("total consumed power is zero; EE is undefined")
    ee = cap / denom
    if mode != Mode.EE or pm.mu == 0:
        report.objective_trace = [ee]
    report.constraint_residuals = fs.residuals(y)
    logger.info(f"Digital solve: {r} eigenmodes, p = {np.sum(powers):.4e} W, EE = {ee:.6e} bit/J")
    return DigitalSolution(q_mat, powers, ee, cap, report)
