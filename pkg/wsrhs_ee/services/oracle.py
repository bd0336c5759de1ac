"""
Oracle Service for WsRHS Energy Efficiency.

This module holds brute-force and analytic reference solutions used to check
the solvers: a random search over SISO surface configurations, classic
water-filling over channel eigenmodes and a grid search for the stationary
transmit power. Nothing here calls into the solver modules.
"""

import logging
import math
from typing import Dict, Tuple

import numpy as np
from pydantic import BaseModel, field_validator

from wsrhs_ee.models.scenario import PowerModel
from wsrhs_ee.models.state import ChannelSet, SurfaceState
from wsrhs_ee.utils.errors import DimensionError, DomainError

logger = logging.getLogger(__name__)

GAIN_FLOOR = 1e-300
REFINE_POINTS = 201


class OracleBudget(BaseModel):
    """Sampling budget of the random-search oracle."""

    samples: int = 10000
    grid_step: float = 1e-3  # fraction of P_max
    seed: int = 0
    chunk_size: int = 4096

    @field_validator("samples", "chunk_size")
    @classmethod
    def validate_counts(cls, v: int) -> int:
        """Counts must be positive."""
        if v < 1:
            raise ValueError("samples and chunk_size must be >= 1")
        return v

    @field_validator("grid_step")
    @classmethod
    def validate_grid_step(cls, v: float) -> float:
        """The grid step must be positive."""
        if not v > 0:
            raise ValueError("grid_step must be > 0")
        return v

    @field_validator("seed")
    @classmethod
    def validate_seed(cls, v: int) -> int:
        """Seeds are unsigned 64-bit integers."""
        if not 0 <= v < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        return v


class OracleResult:
    """Best point found by the random-search oracle."""

    def __init__(self, surfaces: SurfaceState, power: float, effective_gain: float, ee: float):
        self.surfaces = surfaces
        self.power = power
        self.effective_gain = effective_gain
        self.ee = ee

    def to_dict(self) -> Dict:
        return {
            "power": self.power,
            "effective_gain": self.effective_gain,
            "ee": self.ee,
            "surfaces": self.surfaces.to_dict(),
        }

    def __repr__(self) -> str:
        return f"<OracleResult p={self.power:.4g} W ee={self.ee:.6g} bit/J>"


def _ee_curve(p: np.ndarray, a: float, mu: float, p_c: float) -> np.ndarray:
    """log₂(1 + ap)/(μp + P_c) on a grid, −inf where the denominator vanishes."""
    den = mu * p + p_c
    out = np.full(p.shape, -np.inf)
    ok = den > 0
    out[ok] = np.log2(1.0 + a * p[ok]) / den[ok]
    return out


def grid_stationary_power(a: float, mu: float, p_c: float, p_max: float, step: float) -> float:
    """
    Grid maximizer of log₂(1 + ap)/(μp + P_c) over [0, P_max].

    Args:
        a: Effective gain in 1/W
        mu: Amplifier inefficiency
        p_c: Static power in Watts
        p_max: Power budget in Watts
        step: Grid spacing in Watts

    Returns:
        The best grid point
    """
    if not step > 0:
        raise DomainError(f"grid step must be > 0, got {step}")
    grid = np.append(np.arange(0.0, p_max, step), p_max)
    values = _ee_curve(grid, a, mu, p_c)
    return float(grid[int(np.argmax(values))])


def _sample_gains(channels: ChannelSet, noise_power: float, rng: np.random.Generator, count: int):
    """Random surfaces normalized to meet both reflection constraints with equality."""
    h = channels.H[:, 0]
    g_row = channels.G[0, :]
    m_tx, m_rx = channels.m_tx, channels.m_rx
    gamma_t = rng.standard_normal((count, m_tx)) + 1j * rng.standard_normal((count, m_tx))
    gamma_r = rng.standard_normal((count, m_rx)) + 1j * rng.standard_normal((count, m_rx))

    reflected = gamma_t * h[None, :]
    scale_t = np.linalg.norm(h) / np.maximum(np.linalg.norm(reflected, axis=1), GAIN_FLOOR)
    gamma_t *= scale_t[:, None]
    incident_r = (gamma_t * h[None, :]) @ channels.C.T
    scale_r = np.linalg.norm(incident_r, axis=1) / np.maximum(
        np.linalg.norm(gamma_r * incident_r, axis=1), GAIN_FLOOR
    )
    gamma_r *= scale_r[:, None]
    gains = np.abs((gamma_r * incident_r) @ g_row) ** 2 / noise_power
    return gains, gamma_t, gamma_r


def random_search_siso(
    channels: ChannelSet,
    noise_power: float,
    bandwidth: float,
    pm: PowerModel,
    p_max: float,
    budget: OracleBudget = OracleBudget(),
) -> OracleResult:
    """
    Best EE over random SISO surface configurations and a transmit-power grid.

    Samples are drawn in chunks, each chunk from its own child of the budget
    seed, so the result does not depend on how chunks are scheduled.

    Args:
        channels: Channel set with N_T = N_R = 1
        noise_power: σ² in Watts
        bandwidth: B in Hz
        pm: Power model
        p_max: Power budget in Watts
        budget: Sample count, power grid step and seed

    Returns:
        OracleResult
    """
    if channels.n_tx != 1 or channels.n_rx != 1:
        raise DimensionError(f"SISO oracle needs N_T = N_R = 1, got {channels.n_tx}x{channels.n_rx}")
    n_chunks = math.ceil(budget.samples / budget.chunk_size)
    children = np.random.SeedSequence(budget.seed).spawn(n_chunks)

    best_gain, best_t, best_r = -1.0, None, None
    remaining = budget.samples
    for child in children:
        count = min(budget.chunk_size, remaining)
        remaining -= count
        rng = np.random.Generator(np.random.Philox(child))
        gains, gamma_t, gamma_r = _sample_gains(channels, noise_power, rng, count)
        k = int(np.argmax(gains))
        if gains[k] > best_gain:
            best_gain, best_t, best_r = float(gains[k]), gamma_t[k], gamma_r[k]

    p_c = pm.static_power(channels.m_tx, channels.m_rx, 1, 1)
    step = budget.grid_step * p_max
    p = grid_stationary_power(best_gain, pm.mu, p_c, p_max, step)
    fine = np.clip(np.linspace(p - step, p + step, REFINE_POINTS), 0.0, p_max)
    values = _ee_curve(fine, best_gain, pm.mu, p_c)
    k = int(np.argmax(values))
    if values[k] > _ee_curve(np.array([p]), best_gain, pm.mu, p_c)[0]:
        p = float(fine[k])
    ee = bandwidth * float(_ee_curve(np.array([p]), best_gain, pm.mu, p_c)[0])
    logger.debug(f"Random search: {budget.samples} samples, best a = {best_gain:.4e}, p = {p:.4e} W")
    return OracleResult(SurfaceState(best_t, best_r), p, best_gain, ee)


def water_filling_powers(gains: np.ndarray, total_power: float) -> Tuple[np.ndarray, float]:
    """
    Water-filling over parallel channels with SNR gains g_i (1/W).

    Args:
        gains: Per-channel gains; nonpositive gains get no power
        total_power: Power to distribute in Watts

    Returns:
        Tuple of (powers, water level)
    """
    if not total_power > 0:
        raise DomainError(f"total power must be > 0, got {total_power}")
    gains = np.asarray(gains, dtype=float)
    order = np.argsort(gains)[::-1]
    positive = order[gains[order] > 0]
    powers = np.zeros(gains.size)
    if not positive.size:
        return powers, 0.0

    inverse = 1.0 / gains[positive]
    active = positive.size
    # Drop the weakest channel while the water level sits below its floor
    while active > 1:
        level = (total_power + np.sum(inverse[:active])) / active
        if level > inverse[active - 1]:
            break
        active -= 1
    level = (total_power + np.sum(inverse[:active])) / active
    powers[positive[:active]] = level - inverse[:active]
    return powers, float(level)


def water_filling(channel_gram: np.ndarray, noise_power: float, total_power: float) -> np.ndarray:
    """
    Capacity-optimal covariance for a channel Gram matrix KᴴK.

    Args:
        channel_gram: Hermitian PSD N_T × N_T matrix
        noise_power: σ² in Watts
        total_power: P in Watts

    Returns:
        Q with tr(Q) = P
    """
    gram = np.asarray(channel_gram, dtype=complex)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise DimensionError(f"channel Gram matrix must be square, got {gram.shape}")
    w, v = np.linalg.eigh(0.5 * (gram + gram.conj().T))
    powers, _ = water_filling_powers(w / noise_power, total_power)
    if not np.any(powers):
        powers[-1] = total_power
    return (v * powers) @ v.conj().T


def water_filling_capacity(channel_gram: np.ndarray, noise_power: float, total_power: float) -> float:
    """Spectral efficiency Σ log₂(1 + g_i p_i) of the water-filling allocation, in bits/s/Hz."""
    w = np.linalg.eigvalsh(0.5 * (channel_gram + np.asarray(channel_gram).conj().T))
    gains = np.clip(w, 0.0, None) / noise_power
    powers, _ = water_filling_powers(gains, total_power)
    return float(np.sum(np.log2(1.0 + gains * powers)))
