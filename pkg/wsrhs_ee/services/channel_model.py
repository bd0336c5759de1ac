"""
Channel Model Service for WsRHS Energy Efficiency.

This module synthesizes the three channel matrices of a WsRHS-assisted link:
the deterministic near-field matrices H (transmit array to transmit surface)
and G (receive surface to receive array) from element geometry, and the random
Rician far-field matrix C between the two surfaces.
"""

import logging
import math
import zlib
from typing import Sequence, Tuple

import numpy as np

from wsrhs_ee.models.scenario import ArrayGeometry, LinkScenario
from wsrhs_ee.models.state import ChannelSet
from wsrhs_ee.utils.errors import DomainError, GeometryError
from wsrhs_ee.utils.units import dbm_to_watts

logger = logging.getLogger(__name__)


def element_gain(geometry: ArrayGeometry, wavelength: float) -> float:
    """Gain constant α = (4π/λ²)·Δ_h·Δ_v·ρ of one element."""
    return 4.0 * math.pi / wavelength**2 * geometry.h_spacing * geometry.v_spacing * geometry.directivity


def near_field_entry(
    tx_pos: Sequence[float],
    rx_pos: Sequence[float],
    gains: Tuple[float, float],
    wavelength: float,
) -> complex:
    """
    Spherical-wave coefficient between two elements.

    Args:
        tx_pos: Transmitting element position in meters
        rx_pos: Receiving element position in meters
        gains: (α_tx, α_rx) element gain constants
        wavelength: Carrier wavelength in meters

    Returns:
        (λ/4π)·√(α_tx α_rx)·exp(−j2πd/λ)/d
    """
    d = float(np.linalg.norm(np.asarray(rx_pos, dtype=float) - np.asarray(tx_pos, dtype=float)))
    if d <= 0.0:
        raise GeometryError(f"coincident element positions {tuple(tx_pos)}")
    amplitude = wavelength / (4.0 * math.pi) * math.sqrt(gains[0] * gains[1]) / d
    return complex(amplitude * np.exp(-2j * math.pi * d / wavelength))


def synthesize_near_field(source: ArrayGeometry, dest: ArrayGeometry, wavelength: float) -> np.ndarray:
    """
    Near-field matrix from ``source`` to ``dest``, rows indexed by destination elements.

    Args:
        source: Transmitting geometry
        dest: Receiving geometry
        wavelength: Carrier wavelength in meters

    Returns:
        dest.count × source.count complex matrix
    """
    diff = dest.positions()[:, None, :] - source.positions()[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    if np.any(dist <= 0.0):
        r, c = np.argwhere(dist <= 0.0)[0]
        raise GeometryError(
            f"destination element {r} coincides with source element {c} at {tuple(dest.positions()[r])}"
        )
    scale = wavelength / (4.0 * math.pi) * math.sqrt(
        element_gain(source, wavelength) * element_gain(dest, wavelength)
    )
    return scale * np.exp(-2j * math.pi * dist / wavelength) / dist


def path_loss(d: float, scenario: LinkScenario) -> float:
    """
    Distance path loss PL₀·(d/d₀)^−ν as a linear power gain.

    Args:
        d: Distance in meters
        scenario: Link scenario supplying PL₀, d₀ and ν

    Returns:
        Linear path loss
    """
    if not d > 0:
        raise DomainError(f"path loss needs a positive distance, got {d}")
    return scenario.pathloss_ref_linear * (d / scenario.ref_distance_d0) ** (-scenario.pathloss_exponent)


def noise_power(scenario: LinkScenario) -> float:
    """Receiver noise power σ² in Watts from the PSD, bandwidth and noise figure."""
    return dbm_to_watts(scenario.noise_psd + 10.0 * math.log10(scenario.bandwidth) + scenario.noise_figure)


def substream(seed: int, name: str, *key: int) -> np.random.Generator:
    """
    Counter-based generator for a named substream.

    The stream depends only on (seed, name, key), never on call order or
    thread, so Monte Carlo draws are reproducible for any worker count.
    """
    ss = np.random.SeedSequence(seed, spawn_key=(zlib.crc32(name.encode("utf-8")), *key))
    return np.random.Generator(np.random.Philox(ss))


def synthesize_rician(
    rows: int,
    cols: int,
    distance: float,
    scenario: LinkScenario,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Rician matrix with a common line-of-sight phase −2πd/λ.

    Args:
        rows: Number of receiving elements
        cols: Number of transmitting elements
        distance: Link distance in meters
        scenario: Scenario supplying K, λ and the path loss
        rng: Random generator

    Returns:
        rows × cols complex matrix
    """
    if rows < 1 or cols < 1:
        raise DomainError(f"Rician matrix needs positive dimensions, got {rows}x{cols}")
    k = scenario.rice_factor_K
    pl = path_loss(distance, scenario)
    los = np.exp(-2j * math.pi * distance / scenario.wavelength)
    w = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / math.sqrt(2.0)
    return math.sqrt(pl) * (math.sqrt(k / (k + 1.0)) * los + math.sqrt(1.0 / (k + 1.0)) * w)


def synthesize_far_field(
    m_rx: int,
    m_tx: int,
    scenario: LinkScenario,
    rng: np.random.Generator,
) -> np.ndarray:
    """Surface-to-surface matrix C (M_R × M_T) at the scenario's surface separation."""
    return synthesize_rician(m_rx, m_tx, scenario.surface_separation, scenario, rng)


class ChannelModel:
    """Channel synthesizer bound to one scenario."""

    def __init__(self, scenario: LinkScenario):
        """
        Initialize the channel model.

        The deterministic near-field matrices are computed once here.

        Args:
            scenario: The link scenario
        """
        self.scenario = scenario
        wl = scenario.wavelength
        self.H = synthesize_near_field(scenario.tx_array, scenario.tx_surface, wl)
        self.G = synthesize_near_field(scenario.rx_surface, scenario.rx_array, wl)
        self.noise_power = noise_power(scenario)
        logger.debug(
            f"Near-field channels ready: H {self.H.shape}, G {self.G.shape}, σ² = {self.noise_power:.3e} W"
        )

    def realize(self, draw: int = 0) -> ChannelSet:
        """
        Channel set for one Monte Carlo draw.

        Args:
            draw: Draw index; identical (scenario seed, draw) give identical channels

        Returns:
            ChannelSet with the shared H, G and a fresh C
        """
        rng = substream(self.scenario.seed, "C", draw)
        c = synthesize_far_field(self.scenario.m_rx, self.scenario.m_tx, self.scenario, rng)
        return ChannelSet(self.H, self.G, c)

    def direct_channel(self, draw: int = 0) -> np.ndarray:
        """Rician array-to-array matrix (N_R × N_T) used when the surfaces are absent."""
        rng = substream(self.scenario.seed, "H_direct", draw)
        return synthesize_rician(
            self.scenario.n_rx, self.scenario.n_tx, self.scenario.surface_separation, self.scenario, rng
        )


def synthesize_channels(scenario: LinkScenario, draw: int = 0) -> ChannelSet:
    """Convenience wrapper: one ChannelSet for ``scenario`` and ``draw``."""
    return ChannelModel(scenario).realize(draw)
