"""
Multi-Stream Solver Service for WsRHS Energy Efficiency.

This module maximizes the EE of a general MIMO link with a full transmit
covariance Q. It alternates three steps, each of which never lowers the
objective:

- the receive surface γ_R by sequential fractional programming (SFP) on a
  log-det minorant of the capacity term,
- the transmit surface γ_T the same way, with the receive-side reflection
  constraint carried along,
- the covariance Q by Dinkelbach's algorithm over a determinant-maximization
  feasible set.

Each outer iteration first offers the closed-form surfaces for the principal
direction of Q, which are kept only if they are feasible under Q and raise
the objective. With one antenna per side this reaches the SISO optimum.

The surface steps iterate on the reflection vector itself, so the lifted
matrix γγᴴ is rank one by construction and no relaxation is recovered.
"""

import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np

from wsrhs_ee.models.report import Deadline, Mode, SolveReport, SolverOptions, Termination
from wsrhs_ee.models.scenario import PowerModel
from wsrhs_ee.models.state import ChannelSet, SurfaceState, TransmitState
from wsrhs_ee.services.convex_core import (
    Affine,
    AffineHermitianMap,
    LogDet,
    MaxDetProblem,
    QuadraticForm,
    convexify_homogeneous,
    dinkelbach,
    solve_concave_quadratic,
    to_real,
)
from wsrhs_ee.services.numerics import hermitian_eig, logdet_psd, principal_eigpair
from wsrhs_ee.services.power_model import (
    ReflectionReport,
    capacity,
    check_reflection,
    energy_efficiency,
    surface_powers,
)
from wsrhs_ee.services.solver_single_stream import objective_power_model, optimize_surfaces_given_q
from wsrhs_ee.utils.arrays import hermitian_part
from wsrhs_ee.utils.errors import DimensionError, InfeasibleError, ModelError, WsrhsError

logger = logging.getLogger(__name__)

EIGEN_TRUNCATION = 1e-12  # weights below this fraction of the largest are dropped
INACTIVE_ELEMENT_TOL = 1e-12
IDENTITY_RTOL = 1e-9
CHECK_SEED = 20240611


def _truncated_eigen(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of a PSD matrix with λ ≥ 1e−12·λ₁, as (weights, vectors as rows)."""
    eig = hermitian_eig(x)
    if not len(eig) or eig.eigenvalues[0] <= 0:
        return np.zeros(0), np.zeros((0, x.shape[0]), dtype=complex)
    keep = eig.eigenvalues >= EIGEN_TRUNCATION * eig.eigenvalues[0]
    return eig.eigenvalues[keep].copy(), eig.eigenvectors[:, keep].T.copy()


class SurfaceSubproblem:
    """
    Capacity term log₂|I + Σ (w_m/σ²) R_m γγᴴ R_mᴴ| of one surface step.

    The reflection constraint of the surface is γᴴDγ ≤ b with D diagonal;
    the transmit-surface step adds γᴴ(E₁ − E₂)γ ≤ 0 for the receive surface.
    """

    def __init__(
        self,
        weights: np.ndarray,
        maps: np.ndarray,
        trace_matrix: np.ndarray,
        trace_bound: float,
        noise_power: float,
        extra_pair: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    ):
        weights = np.asarray(weights, dtype=float)
        if np.any(weights < -EIGEN_TRUNCATION * max(float(np.max(np.abs(weights), initial=0.0)), 1.0)):
            raise ModelError("surface subproblem weights must be nonnegative")
        self.weights = np.clip(weights, 0.0, None)
        self.maps = np.asarray(maps, dtype=complex)
        if self.maps.ndim != 3 or self.maps.shape[0] != self.weights.size:
            raise DimensionError(f"maps {self.maps.shape} do not match {self.weights.size} weights")
        self.trace_matrix = np.asarray(trace_matrix, dtype=complex)
        self.trace_bound = max(float(trace_bound), 0.0)
        self.noise_power = float(noise_power)
        self.extra_pair = extra_pair

    @property
    def size(self) -> int:
        return self.trace_matrix.shape[0]

    @property
    def out_dim(self) -> int:
        return self.maps.shape[1]

    def capacity_term(self, gamma: np.ndarray) -> float:
        """Spectral efficiency in bits/s/Hz at γ."""
        if not self.weights.size:
            return 0.0
        fields = self.maps @ np.asarray(gamma, dtype=complex)
        scaled = fields * np.sqrt(self.weights / self.noise_power)[:, None]
        return logdet_psd(np.eye(self.out_dim) + scaled.T @ scaled.conj())

    def trace_value(self, gamma: np.ndarray) -> float:
        """Residual γᴴDγ − b of the surface's own reflection constraint."""
        gamma = np.asarray(gamma, dtype=complex)
        return float(np.vdot(gamma, self.trace_matrix @ gamma).real) - self.trace_bound

    def extra_value(self, gamma: np.ndarray) -> float:
        """Residual γᴴ(E₁ − E₂)γ, zero when there is no extra pair."""
        if self.extra_pair is None:
            return 0.0
        gamma = np.asarray(gamma, dtype=complex)
        e1, e2 = self.extra_pair
        return float(np.vdot(gamma, (e1 - e2) @ gamma).real)

    def __repr__(self) -> str:
        return f"<SurfaceSubproblem M={self.size} weights={self.weights.size} bound={self.trace_bound:.3e}>"


def _check_identity(lhs: float, gamma: np.ndarray, sub: SurfaceSubproblem, label: str) -> None:
    rhs = float(np.vdot(gamma, sub.trace_matrix @ gamma).real)
    if abs(lhs - rhs) > IDENTITY_RTOL * max(abs(lhs), abs(rhs), 1e-300):
        raise ModelError(f"{label} trace identity failed: {lhs:.12e} vs {rhs:.12e}")


def _check_vector(size: int) -> np.ndarray:
    rng = np.random.default_rng(CHECK_SEED)
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


def build_gamma_r_subproblem(
    channels: ChannelSet,
    gamma_T: np.ndarray,
    Q: np.ndarray,
    noise_power: float,
) -> SurfaceSubproblem:
    """
    Receive-surface subproblem for fixed γ_T and Q.

    B = CΓ_T H Q Hᴴ Γ_Tᴴ Cᴴ = Σ λ_m u_m u_mᴴ gives R_m = G·diag(u_m) and
    D_R = Σ λ_m diag(|u_m|²), with bound tr(B).

    Args:
        channels: Channel set
        gamma_T: Transmit reflection vector
        Q: Transmit covariance
        noise_power: σ² in Watts

    Returns:
        SurfaceSubproblem over γ_R
    """
    gamma_T = np.asarray(gamma_T, dtype=complex)
    if gamma_T.size != channels.m_tx:
        raise DimensionError(f"γ_T has {gamma_T.size} entries, transmit surface has {channels.m_tx}")
    f = channels.C @ (gamma_T[:, None] * (channels.H @ TransmitState.covariance_form(Q).factor()))
    b_mat = f @ f.conj().T
    weights, vectors = _truncated_eigen(b_mat)
    maps = channels.G[None, :, :] * vectors[:, None, :]
    d_r = np.diag(np.real(np.diag(b_mat))).astype(complex)
    sub = SurfaceSubproblem(weights, maps, d_r, float(np.trace(b_mat).real), noise_power)

    gamma = _check_vector(channels.m_rx)
    _check_identity(float(np.sum(np.abs(gamma[:, None] * f) ** 2)), gamma, sub, "receive-surface")
    logger.debug(f"Receive-surface subproblem: {weights.size} weights, tr(B) = {sub.trace_bound:.3e}")
    return sub


def build_gamma_t_subproblem(
    channels: ChannelSet,
    gamma_R: np.ndarray,
    Q: np.ndarray,
    noise_power: float,
) -> SurfaceSubproblem:
    """
    Transmit-surface subproblem for fixed γ_R and Q.

    A = H Q Hᴴ = Σ β_m v_m v_mᴴ gives S_m = G Γ_R C·diag(v_m) and
    D_T = Σ β_m diag(|v_m|²). The receive-surface constraint becomes
    γᴴ(E₁ − E₂)γ ≤ 0 with E₁ = (ZᴴZ) ⊙ Aᵀ, E₂ = (CᴴC) ⊙ Aᵀ and Z = Γ_R C.

    Args:
        channels: Channel set
        gamma_R: Receive reflection vector
        Q: Transmit covariance
        noise_power: σ² in Watts

    Returns:
        SurfaceSubproblem over γ_T
    """
    gamma_R = np.asarray(gamma_R, dtype=complex)
    if gamma_R.size != channels.m_rx:
        raise DimensionError(f"γ_R has {gamma_R.size} entries, receive surface has {channels.m_rx}")
    incident = channels.H @ TransmitState.covariance_form(Q).factor()
    a_mat = incident @ incident.conj().T
    weights, vectors = _truncated_eigen(a_mat)
    z = gamma_R[:, None] * channels.C
    f = channels.G @ z
    maps = f[None, :, :] * vectors[:, None, :]
    d_t = np.diag(np.real(np.diag(a_mat))).astype(complex)
    e1 = hermitian_part((z.conj().T @ z) * a_mat.T)
    e2 = hermitian_part((channels.C.conj().T @ channels.C) * a_mat.T)
    sub = SurfaceSubproblem(weights, maps, d_t, float(np.trace(a_mat).real), noise_power, (e1, e2))

    gamma = _check_vector(channels.m_tx)
    _check_identity(float(np.sum(np.abs(gamma[:, None] * incident) ** 2)), gamma, sub, "transmit-surface")
    out_r = float(np.sum(np.abs(z @ (gamma[:, None] * incident)) ** 2))
    in_r = float(np.sum(np.abs(channels.C @ (gamma[:, None] * incident)) ** 2))
    if abs((out_r - in_r) - sub.extra_value(gamma)) > IDENTITY_RTOL * max(out_r, in_r, 1e-300):
        raise ModelError("receive-side constraint pair does not reproduce P_out,R − P_in,R")
    logger.debug(f"Transmit-surface subproblem: {weights.size} weights, tr(A) = {sub.trace_bound:.3e}")
    return sub


def _surrogate_map(sub: SurfaceSubproblem, anchor: np.ndarray, active: np.ndarray) -> AffineHermitianMap:
    """
    Affine map of the log-det minorant over x = [Re γ_a; Im γ_a].

    γγᴴ is replaced by γ₀γᴴ + γγ₀ᴴ − γ₀γ₀ᴴ, tight at γ₀.
    """
    c = sub.weights / sub.noise_power
    a = sub.maps @ anchor
    r = sub.maps[:, :, active]
    constant = np.eye(sub.out_dim, dtype=complex) - np.einsum("m,ma,mb->ab", c, a, a.conj())
    t = np.einsum("m,mai,mb->iab", c, r, a.conj())
    th = np.transpose(t.conj(), (0, 2, 1))
    return AffineHermitianMap(constant, np.concatenate([t + th, 1j * (t - th)], axis=0))


def _surface_sfp(
    sub: SurfaceSubproblem,
    gamma0: np.ndarray,
    opts: SolverOptions,
    label: str,
) -> Tuple[np.ndarray, SolveReport]:
    """
    SFP over one reflection vector.

    Each iteration maximizes the log-det minorant at the incumbent under the
    exact trace constraint and the tangent-convexified receive-side pair. Steps
    that lower the true capacity term or leave the feasible set are rejected.
    """
    gamma = np.asarray(gamma0, dtype=complex).copy()
    value = sub.capacity_term(gamma)
    report = SolveReport([value], 0, Termination.MAX_ITERS)

    diag = np.real(np.diag(sub.trace_matrix))
    peak = float(diag.max()) if diag.size else 0.0
    active = diag > INACTIVE_ELEMENT_TOL * peak if peak > 0 else np.zeros(diag.shape, dtype=bool)
    if not sub.weights.size or not np.any(active):
        report.add_note(f"{label} surface receives no signal; kept the incumbent")
        report.termination = Termination.CONVERGED
        return gamma, report
    if not np.all(active):
        report.add_note(f"{int((~active).sum())} {label}-surface element(s) are not illuminated; kept as is")

    idx = np.flatnonzero(active)
    inactive_load = float(np.sum(diag[~active] * np.abs(gamma[~active]) ** 2))
    d_active = sub.trace_matrix[np.ix_(idx, idx)]
    scale = max(sub.trace_bound, 1e-300)
    slack = opts.feas_tol * scale

    for it in range(1, opts.max_sfp_iters + 1):
        anchor = gamma[idx]
        quads = [QuadraticForm(d_active, None, inactive_load - sub.trace_bound)]
        if sub.extra_pair is not None:
            e1, e2 = sub.extra_pair
            qf = convexify_homogeneous(e1[np.ix_(idx, idx)], e2[np.ix_(idx, idx)], anchor)
            if qf is not None:
                quads.append(qf)
        fmap = _surrogate_map(sub, gamma, idx)
        surrogate = LogDet(fmap)
        x0 = to_real(anchor)
        if not math.isfinite(surrogate.value(x0)):
            report.add_note(f"{label} surrogate is undefined at the incumbent; stopped")
            report.termination = Termination.CONVERGED
            break

        step, inner = solve_concave_quadratic(surrogate, quads, None, opts, anchor, lmis=[fmap])
        if inner.termination == Termination.INFEASIBLE:
            report.add_note(f"{label} surrogate has no interior point; kept the incumbent")
            report.termination = Termination.CONVERGED
            break

        candidate = gamma.copy()
        candidate[idx] = step
        new_value = sub.capacity_term(candidate)
        report.iterations = it
        report.kkt_residual = inner.kkt_residual
        feasible = sub.trace_value(candidate) <= slack and sub.extra_value(candidate) <= slack
        if not feasible or new_value < value:
            reason = "left the feasible set" if not feasible else "lowered the objective"
            report.add_note(f"rejected a {label}-surface step that {reason}")
            logger.debug(f"{label} SFP iteration {it}: rejected ({reason})")
            report.termination = Termination.CONVERGED
            break
        change = new_value - value
        gamma, value = candidate, new_value
        report.objective_trace.append(value)
        logger.debug(f"{label} SFP iteration {it}: capacity term = {value:.12g} bit/s/Hz")
        if change <= opts.sfp_tol * abs(value):
            report.termination = Termination.CONVERGED
            break

    report.constraint_residuals = [sub.trace_value(gamma), sub.extra_value(gamma)]
    return gamma, report


def optimize_gamma_r(
    subproblem: SurfaceSubproblem,
    gamma_R0: np.ndarray,
    opts: Optional[SolverOptions] = None,
) -> Tuple[np.ndarray, SolveReport]:
    """
    SFP for the receive reflection vector.

    Args:
        subproblem: Output of ``build_gamma_r_subproblem``
        gamma_R0: Feasible start vector
        opts: Solver options

    Returns:
        Tuple of (γ_R, SolveReport) with a nondecreasing capacity-term trace
    """
    return _surface_sfp(subproblem, gamma_R0, opts or SolverOptions(), "receive")


def optimize_gamma_t(
    channels: ChannelSet,
    gamma_R: np.ndarray,
    Q: np.ndarray,
    gamma_T0: np.ndarray,
    noise_power: float,
    opts: Optional[SolverOptions] = None,
) -> Tuple[np.ndarray, SolveReport]:
    """
    SFP for the transmit reflection vector.

    Args:
        channels: Channel set
        gamma_R: Fixed receive reflection vector
        Q: Fixed transmit covariance
        gamma_T0: Feasible start vector
        noise_power: σ² in Watts
        opts: Solver options

    Returns:
        Tuple of (γ_T, SolveReport)
    """
    sub = build_gamma_t_subproblem(channels, gamma_R, Q, noise_power)
    return _surface_sfp(sub, gamma_T0, opts or SolverOptions(), "transmit")


def _reflection_trace_constraints(channels: ChannelSet, surfaces: SurfaceState) -> List[Tuple[np.ndarray, float]]:
    """(D, 0) pairs with P_out − P_in = tr(DQ); constraints implied by Q ⪰ 0 are dropped."""
    th = surfaces.gamma_T[:, None] * channels.H
    cth = channels.C @ th
    rcth = surfaces.gamma_R[:, None] * cth
    pairs = [
        (th.conj().T @ th, channels.H.conj().T @ channels.H),
        (rcth.conj().T @ rcth, cth.conj().T @ cth),
    ]
    out = []
    for out_gram, in_gram in pairs:
        d = hermitian_part(out_gram - in_gram)
        ref = max(float(np.linalg.norm(out_gram, 2)), float(np.linalg.norm(in_gram, 2)))
        if ref > 0 and np.linalg.eigvalsh(d)[-1] > EIGEN_TRUNCATION * ref:
            out.append((d, 0.0))
    return out


def optimize_Q(
    channels: ChannelSet,
    surfaces: SurfaceState,
    pm: PowerModel,
    p_max: float,
    noise_power: float,
    bandwidth: float,
    opts: Optional[SolverOptions] = None,
    mode: Mode = Mode.EE,
    Q_start: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, SolveReport]:
    """
    Transmit covariance for fixed surfaces.

    Over X = Q/P_max the set is X ⪰ 0, tr X ≤ 1 and both reflection
    constraints written as tr(DX) ≤ 0. EE mode runs Dinkelbach on
    log₂|I + (P_max/σ²)KXKᴴ| / (μP_max tr X + P_c); Capacity mode maximizes
    the numerator once.

    Args:
        channels: Channel set
        surfaces: Fixed reflection vectors
        pm: Power model
        p_max: Power budget in Watts
        noise_power: σ² in Watts
        bandwidth: B in Hz
        opts: Solver options
        mode: EE or Capacity
        Q_start: Optional feasible start covariance

    Returns:
        Tuple of (Q, SolveReport) with the trace in bits/J (EE) or bits/s (Capacity)
    """
    opts = opts or SolverOptions()
    n = channels.n_tx
    k = channels.composite(surfaces)
    report = SolveReport(termination=Termination.CONVERGED)
    if not np.any(k):
        report.add_note("composite channel is zero; Q = 0")
        return np.zeros((n, n), dtype=complex), report

    p_c = pm.static_power(channels.m_tx, channels.m_rx, channels.n_tx, channels.n_rx)
    ee_mode = mode == Mode.EE and pm.mu > 0.0
    if mode == Mode.EE and not p_c > 0:
        raise ModelError("EE mode needs a positive static power for the covariance step")

    constraints = [(np.eye(n), 1.0)] + _reflection_trace_constraints(channels, surfaces)
    problem = MaxDetProblem([(p_max, k)], constraints, n, noise_power)
    fs = problem.feasible_set
    start = np.eye(n) / n if Q_start is None else np.asarray(Q_start, dtype=complex) / p_max
    x0 = problem.point(start)

    try:
        if ee_mode:
            denominator = Affine(pm.mu * p_max * problem.basis.trace_coefficients(np.eye(n)), p_c)
            x, inner = dinkelbach(problem.objective, denominator, fs, x0, opts)
            if inner.termination == Termination.INFEASIBLE:
                raise InfeasibleError("covariance set has no interior")
            report.objective_trace = [bandwidth * v for v in inner.objective_trace]
            report.iterations = inner.iterations
            report.termination = inner.termination
            report.certificate = inner.certificate
            report.kkt_residual = inner.kkt_residual
        else:
            start_value = problem.objective.value(x0)
            x, gap, steps = fs.maximize(problem.objective, x0, opts)
            report.objective_trace = ([bandwidth * start_value] if math.isfinite(start_value) else []) + [
                bandwidth * problem.objective.value(x)
            ]
            report.iterations = steps
            report.kkt_residual = gap
    except InfeasibleError:
        report.add_note("covariance feasible set has no interior; kept the incumbent Q")
        logger.warning("Covariance step skipped: empty interior")
        fallback = np.zeros((n, n), dtype=complex) if Q_start is None else np.asarray(Q_start, dtype=complex)
        return fallback, report

    gamma_mat, _ = problem.split(x)
    q_mat = p_max * hermitian_part(gamma_mat)
    report.constraint_residuals = fs.residuals(x)
    logger.debug(f"Covariance step: tr(Q) = {np.trace(q_mat).real:.4e} W, {report.iterations} iterations")
    return q_mat, report


def closed_form_restart(
    channels: ChannelSet,
    q_mat: np.ndarray,
    report: SolveReport,
    tol: float,
) -> Optional[SurfaceState]:
    """
    Closed-form surfaces for the principal direction of Q.

    The surfaces maximize the received power along √λ₁·u₁ and meet both
    reflection constraints with equality for that direction. They are
    returned only if they also satisfy the constraints under the full Q.

    Args:
        channels: Channel set
        q_mat: Current transmit covariance
        report: Outer report receiving notes
        tol: Relative reflection tolerance

    Returns:
        SurfaceState, or None when unavailable or infeasible under Q
    """
    try:
        lam, u = principal_eigpair(q_mat)
        if not lam > 0:
            return None
        surfaces = optimize_surfaces_given_q(math.sqrt(lam) * u, channels, report)
    except WsrhsError as e:
        report.add_note(f"closed-form surface restart unavailable: {e}")
        return None
    if not ReflectionReport(surface_powers(channels, surfaces, TransmitState.covariance_form(q_mat)), tol).feasible:
        return None
    return surfaces


class MultiStreamSolution:
    """Result of the multi-stream alternating maximization."""

    def __init__(
        self,
        surfaces: SurfaceState,
        Q: np.ndarray,
        ee: float,
        capacity: float,
        report: SolveReport,
    ):
        """
        Initialize a multi-stream solution.

        Args:
            surfaces: Final reflection vectors
            Q: Final transmit covariance
            ee: Energy efficiency in bits/J under the true power model
            capacity: Capacity in bits/s
            report: Outer-loop trace of the optimized objective
        """
        self.surfaces = surfaces
        self.Q = Q
        self.ee = ee
        self.capacity = capacity
        self.report = report

    @property
    def outer_iterations(self) -> int:
        return self.report.iterations

    @property
    def power(self) -> float:
        return float(np.trace(self.Q).real)

    def to_dict(self) -> Dict:
        return {
            "power": self.power,
            "ee": self.ee,
            "capacity": self.capacity,
            "surfaces": self.surfaces.to_dict(),
            "report": self.report.to_dict(),
        }

    def __repr__(self) -> str:
        return f"<MultiStreamSolution power={self.power:.4g} W ee={self.ee:.6g} bit/J>"


def alternate_multi_stream(
    channels: ChannelSet,
    pm: PowerModel,
    p_max: float,
    noise_power: float,
    bandwidth: float,
    opts: Optional[SolverOptions] = None,
    mode: Mode = Mode.EE,
) -> MultiStreamSolution:
    """
    Alternate γ_R, γ_T and Q steps until the objective settles.

    Args:
        channels: Channel set
        pm: Power model
        p_max: Power budget in Watts
        noise_power: σ² in Watts
        bandwidth: B in Hz
        opts: Solver options
        mode: EE or Capacity

    Returns:
        MultiStreamSolution
    """
    opts = opts or SolverOptions()
    deadline = Deadline(opts.time_limit_s)
    pm_opt = objective_power_model(pm, mode)

    def objective(s: SurfaceState, cov: np.ndarray) -> float:
        return energy_efficiency(channels, s, TransmitState.covariance_form(cov), noise_power, bandwidth, pm_opt)

    q_mat = np.eye(channels.n_tx, dtype=complex) * p_max / channels.n_tx
    surfaces = SurfaceState.unit(channels.m_tx, channels.m_rx)
    value = objective(surfaces, q_mat)
    report = SolveReport([value], 0, Termination.MAX_ITERS)

    def merge(step_report: SolveReport) -> None:
        for note in step_report.notes:
            report.add_note(note)

    for it in range(1, opts.max_iters + 1):
        deadline.check("multi-stream alternation")
        start_value = value

        restart = closed_form_restart(channels, q_mat, report, opts.feas_tol)
        if restart is not None:
            restart_value = objective(restart, q_mat)
            if restart_value > value:
                surfaces, value = restart, restart_value
                logger.debug(f"Multi-stream iteration {it}: closed-form surfaces raised the objective")

        sub_r = build_gamma_r_subproblem(channels, surfaces.gamma_T, q_mat, noise_power)
        gamma_r, r_report = optimize_gamma_r(sub_r, surfaces.gamma_R, opts)
        merge(r_report)
        candidate = SurfaceState(surfaces.gamma_T, gamma_r)
        candidate_value = objective(candidate, q_mat)
        if candidate_value >= value:
            surfaces, value = candidate, candidate_value
        else:
            report.add_note("rejected a receive-surface step that lowered the objective")

        gamma_t, t_report = optimize_gamma_t(channels, surfaces.gamma_R, q_mat, surfaces.gamma_T, noise_power, opts)
        merge(t_report)
        candidate = SurfaceState(gamma_t, surfaces.gamma_R)
        candidate_value = objective(candidate, q_mat)
        if candidate_value >= value:
            surfaces, value = candidate, candidate_value
        else:
            report.add_note("rejected a transmit-surface step that lowered the objective")

        q_new, q_report = optimize_Q(channels, surfaces, pm, p_max, noise_power, bandwidth, opts, mode, q_mat)
        merge(q_report)
        if q_report.certificate is not None:
            report.certificate = q_report.certificate
        q_value = objective(surfaces, q_new)
        if q_value >= value and np.trace(q_new).real <= p_max * (1.0 + opts.feas_tol):
            q_mat, value = q_new, q_value
        else:
            report.add_note("rejected a covariance step that lowered the objective")

        report.objective_trace.append(value)
        report.iterations = it
        logger.debug(f"Multi-stream iteration {it}: objective = {value:.12g}")
        if abs(value - start_value) <= opts.sfp_tol * abs(value):
            report.termination = Termination.CONVERGED
            break

    tx = TransmitState.covariance_form(q_mat)
    reflection = check_reflection(channels, surfaces, tx)
    report.constraint_residuals = [float(np.trace(q_mat).real) - p_max] + reflection.residuals
    ee = energy_efficiency(channels, surfaces, tx, noise_power, bandwidth, pm)
    cap = capacity(channels, surfaces, tx, noise_power, bandwidth)
    logger.info(
        f"Multi-stream solve: {report.iterations} iterations ({report.termination.value}), "
        f"EE = {ee:.6e} bit/J, C = {cap:.6e} bit/s"
    )
    return MultiStreamSolution(surfaces, q_mat, ee, cap, report)
