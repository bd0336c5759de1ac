"""
Channel and optimization state containers for WsRHS Energy Efficiency.

ChannelSet holds one channel realization, SurfaceState the two reflection
vectors and TransmitState the transmit signal in one of its three forms.
"""

from enum import Enum
from typing import Dict

import numpy as np

from wsrhs_ee.utils.arrays import PSD_TOL, as_complex_matrix, as_complex_vector, hermitian_part
from wsrhs_ee.utils.errors import DimensionError, DomainError, NotPSDError


class ChannelSet:
    """The channel triple (H, G, C) of one realization."""

    def __init__(self, H, G, C):
        """
        Initialize a channel set.

        Args:
            H: Transmit array to transmit surface, M_T × N_T
            G: Receive surface to receive array, N_R × M_R
            C: Transmit surface to receive surface, M_R × M_T
        """
        self.H = as_complex_matrix(H, "H")
        self.G = as_complex_matrix(G, "G")
        self.C = as_complex_matrix(C, "C")
        if self.C.shape != (self.G.shape[1], self.H.shape[0]):
            raise DimensionError(
                f"C must be {self.G.shape[1]}x{self.H.shape[0]} to chain H {self.H.shape} "
                f"and G {self.G.shape}, got {self.C.shape}"
            )

    @property
    def n_tx(self) -> int:
        return self.H.shape[1]

    @property
    def n_rx(self) -> int:
        return self.G.shape[0]

    @property
    def m_tx(self) -> int:
        return self.H.shape[0]

    @property
    def m_rx(self) -> int:
        return self.G.shape[1]

    def composite(self, surfaces: "SurfaceState") -> np.ndarray:
        """End-to-end channel G Γ_R C Γ_T H."""
        surfaces.check_shapes(self)
        return (self.G * surfaces.gamma_R) @ (self.C * surfaces.gamma_T) @ self.H

    def to_dict(self) -> Dict:
        return {"n_tx": self.n_tx, "n_rx": self.n_rx, "m_tx": self.m_tx, "m_rx": self.m_rx}

    def __repr__(self) -> str:
        return f"<ChannelSet N_T={self.n_tx} N_R={self.n_rx} M_T={self.m_tx} M_R={self.m_rx}>"


class SurfaceState:
    """Reflection vectors γ_T and γ_R of the two surfaces."""

    def __init__(self, gamma_T, gamma_R):
        self.gamma_T = as_complex_vector(gamma_T, "gamma_T")
        self.gamma_R = as_complex_vector(gamma_R, "gamma_R")

    @classmethod
    def unit(cls, m_tx: int, m_rx: int) -> "SurfaceState":
        """All-ones (unit-modulus) surfaces."""
        return cls(np.ones(m_tx, dtype=complex), np.ones(m_rx, dtype=complex))

    def check_shapes(self, channels: ChannelSet) -> None:
        """Raise DimensionError if the vectors do not match the channel sizes."""
        if self.gamma_T.size != channels.m_tx or self.gamma_R.size != channels.m_rx:
            raise DimensionError(
                f"surfaces ({self.gamma_T.size}, {self.gamma_R.size}) do not match "
                f"M_T={channels.m_tx}, M_R={channels.m_rx}"
            )

    def copy(self) -> "SurfaceState":
        return SurfaceState(self.gamma_T.copy(), self.gamma_R.copy())

    def max_modulus(self) -> float:
        """Largest |γ_i| over both surfaces."""
        return float(max(np.max(np.abs(self.gamma_T)), np.max(np.abs(self.gamma_R))))

    def to_dict(self) -> Dict:
        return {
            "gamma_T": [[float(v.real), float(v.imag)] for v in self.gamma_T],
            "gamma_R": [[float(v.real), float(v.imag)] for v in self.gamma_R],
        }

    def __repr__(self) -> str:
        return f"<SurfaceState M_T={self.gamma_T.size} M_R={self.gamma_R.size}>"


class TransmitKind(str, Enum):
    """Form of the transmit signal."""

    COVARIANCE = "Covariance"
    BEAMVECTOR = "Beamvector"
    SCALAR_POWER = "ScalarPower"


class TransmitState:
    """
    Transmit covariance Q, beamvector q or scalar power p.

    All three forms expose ``covariance()`` and ``factor()``, a matrix F with
    Q = F Fᴴ, so power and capacity formulas share one code path.
    """

    def __init__(self, kind: TransmitKind, value):
        self.kind = kind
        if kind == TransmitKind.COVARIANCE:
            q = as_complex_matrix(value, "Q")
            if q.shape[0] != q.shape[1]:
                raise DimensionError(f"Q must be square, got {q.shape}")
            q = hermitian_part(q)
            scale = float(np.max(np.abs(q))) if q.size else 0.0
            if q.size and np.linalg.eigvalsh(q)[0] < -PSD_TOL * max(scale, 1.0):
                raise NotPSDError("transmit covariance Q is not PSD")
            self.value = q
        elif kind == TransmitKind.BEAMVECTOR:
            self.value = as_complex_vector(value, "q")
        else:
            p = float(value)
            if not np.isfinite(p) or p < 0:
                raise DomainError(f"scalar power must be finite and >= 0, got {p}")
            self.value = p

    @classmethod
    def covariance_form(cls, Q) -> "TransmitState":
        return cls(TransmitKind.COVARIANCE, Q)

    @classmethod
    def beamvector(cls, q) -> "TransmitState":
        return cls(TransmitKind.BEAMVECTOR, q)

    @classmethod
    def scalar_power(cls, p: float) -> "TransmitState":
        return cls(TransmitKind.SCALAR_POWER, p)

    @property
    def n_tx(self) -> int:
        if self.kind == TransmitKind.COVARIANCE:
            return self.value.shape[0]
        if self.kind == TransmitKind.BEAMVECTOR:
            return self.value.size
        return 1

    def covariance(self) -> np.ndarray:
        """Q as an N_T × N_T matrix."""
        if self.kind == TransmitKind.COVARIANCE:
            return self.value
        f = self.factor()
        return f @ f.conj().T

    def factor(self) -> np.ndarray:
        """A matrix F with Q = F Fᴴ."""
        if self.kind == TransmitKind.BEAMVECTOR:
            return self.value.reshape(-1, 1)
        if self.kind == TransmitKind.SCALAR_POWER:
            return np.array([[np.sqrt(self.value)]], dtype=complex)
        w, v = np.linalg.eigh(self.value)
        return v * np.sqrt(np.clip(w, 0.0, None))

    def trace(self) -> float:
        """Transmit power tr(Q)."""
        if self.kind == TransmitKind.BEAMVECTOR:
            return float(np.vdot(self.value, self.value).real)
        if self.kind == TransmitKind.SCALAR_POWER:
            return float(self.value)
        return float(np.trace(self.value).real)

    def to_dict(self) -> Dict:
        out: Dict = {"kind": self.kind.value, "power": self.trace()}
        if self.kind == TransmitKind.BEAMVECTOR:
            out["q"] = [[float(v.real), float(v.imag)] for v in self.value]
        return out

    def __repr__(self) -> str:
        return f"<TransmitState kind={self.kind.value} power={self.trace():.4g}>"


def as_transmit_state(tx) -> TransmitState:
    """Wrap raw input: scalars become ScalarPower, 1-D arrays Beamvector, 2-D Covariance."""
    if isinstance(tx, TransmitState):
        return tx
    arr = np.asarray(tx)
    if arr.ndim == 0:
        return TransmitState.scalar_power(float(arr.real))
    if arr.ndim == 1:
        return TransmitState.beamvector(arr)
    return TransmitState.covariance_form(arr)
