"""
Scenario models for WsRHS Energy Efficiency.

This module defines the validated physical description of a link: array and
surface geometries, carrier and noise parameters, Rician fading parameters
and the power consumption model.
"""

import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from wsrhs_ee.utils.units import SPEED_OF_LIGHT, db_to_linear, dbm_to_watts

Point = Tuple[float, float, float]


def _grid_axes(normal: Sequence[float]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal in-plane axes (u, v) for a grid facing ``normal``."""
    n = np.asarray(normal, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0:
        raise ValueError("grid normal must be nonzero")
    n = n / norm
    helper = np.array([0.0, 0.0, 1.0]) if abs(n[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    u = np.cross(helper, n)
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    return u, v, n


def grid_positions(
    rows: int,
    cols: int,
    h_spacing: float,
    v_spacing: float,
    center: Sequence[float] = (0.0, 0.0, 0.0),
    normal: Sequence[float] = (0.0, 0.0, 1.0),
) -> List[Point]:
    """
    Element positions of a rectangular grid.

    Args:
        rows: Number of rows (along the vertical in-plane axis)
        cols: Number of columns (along the horizontal in-plane axis)
        h_spacing: Horizontal spacing in meters
        v_spacing: Vertical spacing in meters
        center: Grid center in meters
        normal: Direction the grid faces

    Returns:
        List of (x, y, z) tuples, row-major
    """
    u, v, _ = _grid_axes(normal)
    c = np.asarray(center, dtype=float)
    positions = []
    for r in range(rows):
        for k in range(cols):
            p = c + (k - (cols - 1) / 2.0) * h_spacing * u + (r - (rows - 1) / 2.0) * v_spacing * v
            positions.append(tuple(float(x) for x in p))
    return positions


def grid_shape(count: int) -> Tuple[int, int]:
    """Near-square (rows, cols) factorization with rows <= cols."""
    rows = int(math.isqrt(count))
    while count % rows:
        rows -= 1
    return rows, count // rows


class ArrayGeometry(BaseModel):
    """Element positions and spacing of an antenna array or metasurface."""

    model_config = ConfigDict(frozen=True)

    element_positions: List[Point]
    h_spacing: float
    v_spacing: float
    directivity: float = 1.0

    @model_validator(mode="before")
    @classmethod
    def expand_grid(cls, data: Any) -> Any:
        """Expand a ``grid`` block (rows, cols, spacings in meters, center, normal)."""
        if isinstance(data, dict) and "grid" in data:
            data = dict(data)
            grid = data.pop("grid")
            data["element_positions"] = grid_positions(
                grid["rows"],
                grid["cols"],
                grid["h_spacing"],
                grid["v_spacing"],
                grid.get("center", (0.0, 0.0, 0.0)),
                grid.get("normal", (0.0, 0.0, 1.0)),
            )
            data.setdefault("h_spacing", grid["h_spacing"])
            data.setdefault("v_spacing", grid["v_spacing"])
        return data

    @field_validator("h_spacing", "v_spacing")
    @classmethod
    def validate_spacing(cls, v: float) -> float:
        """Spacings must be positive."""
        if not v > 0:
            raise ValueError("element spacing must be > 0")
        return v

    @field_validator("directivity")
    @classmethod
    def validate_directivity(cls, v: float) -> float:
        """Directivity is a nonnegative scalar."""
        if v < 0:
            raise ValueError("directivity must be >= 0")
        return v

    @field_validator("element_positions")
    @classmethod
    def validate_positions(cls, v: List[Point]) -> List[Point]:
        """Positions must be non-empty, finite and distinct."""
        if not v:
            raise ValueError("an array needs at least one element")
        pts = np.asarray(v, dtype=float)
        if not np.all(np.isfinite(pts)):
            raise ValueError("element positions must be finite")
        if len(pts) > 1:
            diff = pts[:, None, :] - pts[None, :, :]
            dist = np.linalg.norm(diff, axis=-1) + np.eye(len(pts))
            if np.min(dist) <= 0:
                raise ValueError("element positions must be distinct")
        return v

    @classmethod
    def rectangular(
        cls,
        rows: int,
        cols: int,
        h_spacing: float,
        v_spacing: float,
        center: Sequence[float] = (0.0, 0.0, 0.0),
        normal: Sequence[float] = (0.0, 0.0, 1.0),
        directivity: float = 1.0,
    ) -> "ArrayGeometry":
        """Build a rectangular grid geometry."""
        return cls(
            element_positions=grid_positions(rows, cols, h_spacing, v_spacing, center, normal),
            h_spacing=h_spacing,
            v_spacing=v_spacing,
            directivity=directivity,
        )

    @property
    def count(self) -> int:
        """Number of elements."""
        return len(self.element_positions)

    def positions(self) -> np.ndarray:
        """Element positions as a (count, 3) array."""
        return np.asarray(self.element_positions, dtype=float)


class PowerModel(BaseModel):
    """Transmit amplifier inefficiency and static power terms, in Watts."""

    model_config = ConfigDict(frozen=True)

    mu: float = 1.0
    per_element_static_T: float = 0.0
    per_element_static_R: float = 0.0
    per_chain_static_T: float = 0.0
    per_chain_static_R: float = 0.0
    surface_overhead: float = 0.0
    system_overhead: float = 0.0

    @field_validator("*")
    @classmethod
    def validate_nonnegative(cls, v: float) -> float:
        """All power terms are nonnegative."""
        if v < 0 or not math.isfinite(v):
            raise ValueError("power model terms must be finite and >= 0")
        return v

    @classmethod
    def from_dbm(
        cls,
        per_element_dbm: float = 0.0,
        per_chain_dbm: float = 34.0,
        overhead_dbm: float = 37.0,
        mu: float = 1.0,
    ) -> "PowerModel":
        """
        Build the model from dBm levels.

        The per-element level applies to both surfaces, the per-chain level to
        both ends, and the overhead to the system term; the surface overhead is zero.
        """
        element = dbm_to_watts(per_element_dbm)
        chain = dbm_to_watts(per_chain_dbm)
        return cls(
            mu=mu,
            per_element_static_T=element,
            per_element_static_R=element,
            per_chain_static_T=chain,
            per_chain_static_R=chain,
            surface_overhead=0.0,
            system_overhead=dbm_to_watts(overhead_dbm),
        )

    def static_power(self, m_tx: int, m_rx: int, n_tx: int, n_rx: int) -> float:
        """
        Static power P_c for the given element and chain counts.

        Args:
            m_tx: Transmit surface elements
            m_rx: Receive surface elements
            n_tx: Transmit RF chains
            n_rx: Receive RF chains

        Returns:
            P_c in Watts
        """
        if min(m_tx, m_rx, n_tx, n_rx) < 0:
            raise ValueError("element and chain counts must be >= 0")
        return (
            m_tx * self.per_element_static_T
            + m_rx * self.per_element_static_R
            + n_tx * self.per_chain_static_T
            + n_rx * self.per_chain_static_R
            + self.surface_overhead
            + self.system_overhead
        )

    def with_mu(self, mu: float) -> "PowerModel":
        """Copy of the model with a different amplifier inefficiency."""
        return self.model_copy(update={"mu": mu})

    def with_chain_static(self, watts: float) -> "PowerModel":
        """Copy of the model with both per-chain static terms set to ``watts``."""
        return self.model_copy(update={"per_chain_static_T": watts, "per_chain_static_R": watts})


def build_layout(
    n_tx: int = 1,
    n_rx: int = 1,
    m_tx: int = 32,
    m_rx: int = 32,
    surface_distance: float = 0.25,
    surface_separation: float = 100.0,
    carrier_freq: float = 3.5e9,
    spacing_wavelengths: float = 0.5,
    directivity: float = 1.0,
) -> Dict[str, ArrayGeometry]:
    """
    Default placement: each surface broadside to its array at ``surface_distance``.

    The transmit side sits at the origin facing +z; the receive side is offset
    by ``surface_separation`` along x. Arrays and surfaces are near-square grids
    with the given spacing in wavelengths.

    Returns:
        Dictionary with tx_array, rx_array, tx_surface, rx_surface geometries
    """
    wl = SPEED_OF_LIGHT / carrier_freq
    spacing = spacing_wavelengths * wl

    def make(count: int, center: Point) -> ArrayGeometry:
        rows, cols = grid_shape(count)
        return ArrayGeometry.rectangular(rows, cols, spacing, spacing, center, (0.0, 0.0, 1.0), directivity)

    return {
        "tx_array": make(n_tx, (0.0, 0.0, 0.0)),
        "tx_surface": make(m_tx, (0.0, 0.0, surface_distance)),
        "rx_surface": make(m_rx, (surface_separation, 0.0, surface_distance)),
        "rx_array": make(n_rx, (surface_separation, 0.0, 0.0)),
    }


class LinkScenario(BaseModel):
    """Full physical description of a WsRHS-assisted link."""

    model_config = ConfigDict(frozen=True)

    carrier_freq: float = 3.5e9
    bandwidth: float = 20e6
    tx_array: ArrayGeometry
    rx_array: ArrayGeometry
    tx_surface: ArrayGeometry
    rx_surface: ArrayGeometry
    surface_separation: float = 100.0
    rice_factor_K: float = 10.0
    pathloss_ref_db: Optional[float] = None  # None: free-space loss at d0
    ref_distance_d0: float = 1.0
    pathloss_exponent: float = 2.0
    noise_psd: float = -174.0  # dBm/Hz
    noise_figure: float = 5.0  # dB
    seed: int = 0
    power_model: PowerModel = PowerModel.from_dbm()

    @model_validator(mode="before")
    @classmethod
    def expand_layout(cls, data: Any) -> Any:
        """Expand a ``layout`` block into the four default geometries."""
        if isinstance(data, dict) and "layout" in data:
            data = dict(data)
            layout = dict(data.pop("layout"))
            layout.setdefault("carrier_freq", data.get("carrier_freq", 3.5e9))
            layout.setdefault("surface_separation", data.get("surface_separation", 100.0))
            for key, geometry in build_layout(**layout).items():
                data.setdefault(key, geometry)
        return data

    @field_validator("carrier_freq", "bandwidth", "ref_distance_d0", "pathloss_exponent")
    @classmethod
    def validate_positive(cls, v: float) -> float:
        """Frequencies, bandwidth, reference distance and exponent are positive."""
        if not v > 0:
            raise ValueError("value must be > 0")
        return v

    @field_validator("rice_factor_K")
    @classmethod
    def validate_rice_factor(cls, v: float) -> float:
        """K is nonnegative."""
        if v < 0:
            raise ValueError("rice_factor_K must be >= 0")
        return v

    @field_validator("seed")
    @classmethod
    def validate_seed(cls, v: int) -> int:
        """Seeds are unsigned 64-bit integers."""
        if not 0 <= v < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        return v

    @model_validator(mode="after")
    def validate_separation(self) -> "LinkScenario":
        """The surface separation must not be shorter than the reference distance."""
        if self.surface_separation < self.ref_distance_d0:
            raise ValueError("surface_separation must be >= ref_distance_d0")
        return self

    @property
    def wavelength(self) -> float:
        """Carrier wavelength in meters."""
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def pathloss_ref_linear(self) -> float:
        """PL₀ as a linear power gain."""
        if self.pathloss_ref_db is None:
            return (self.wavelength / (4.0 * math.pi * self.ref_distance_d0)) ** 2
        return db_to_linear(self.pathloss_ref_db)

    @property
    def n_tx(self) -> int:
        return self.tx_array.count

    @property
    def n_rx(self) -> int:
        return self.rx_array.count

    @property
    def m_tx(self) -> int:
        return self.tx_surface.count

    @property
    def m_rx(self) -> int:
        return self.rx_surface.count

    def static_power(self) -> float:
        """P_c for this scenario's element and chain counts."""
        return self.power_model.static_power(self.m_tx, self.m_rx, self.n_tx, self.n_rx)


def default_scenario(
    n_tx: int = 1,
    n_rx: int = 1,
    m_tx: int = 32,
    m_rx: int = 32,
    surface_distance: float = 0.25,
    seed: int = 0,
    **overrides: Any,
) -> LinkScenario:
    """
    Scenario with the evaluation defaults: 3.5 GHz, 20 MHz, K = 10, 100 m
    separation, −174 dBm/Hz noise with a 5 dB figure, 0/34/37 dBm static terms.

    Args:
        n_tx: Transmit antennas
        n_rx: Receive antennas
        m_tx: Transmit surface elements
        m_rx: Receive surface elements
        surface_distance: Array-to-surface distance in meters
        seed: Channel seed
        **overrides: Any other LinkScenario field

    Returns:
        A validated LinkScenario
    """
    layout = build_layout(
        n_tx=n_tx,
        n_rx=n_rx,
        m_tx=m_tx,
        m_rx=m_rx,
        surface_distance=surface_distance,
        surface_separation=overrides.get("surface_separation", 100.0),
        carrier_freq=overrides.get("carrier_freq", 3.5e9),
    )
    return LinkScenario(seed=seed, **layout, **overrides)
