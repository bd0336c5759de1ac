"""
Shared pytest fixtures for the WsRHS Energy Efficiency tests.

Random instances use unit-variance complex Gaussian channels and σ² = 1, so
the solvers are exercised at well-scaled magnitudes; the physical scenario
is covered by the channel-model and harness tests.
"""

import logging
import sys

import numpy as np
import pytest

from wsrhs_ee.models.report import SolverOptions
from wsrhs_ee.models.scenario import PowerModel
from wsrhs_ee.models.state import ChannelSet

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    handlers=[logging.StreamHandler(sys.stdout)],
)


def complex_gaussian(rng: np.random.Generator, *shape: int) -> np.ndarray:
    """Unit-variance circular complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@pytest.fixture
def channel_factory():
    """Build a random ChannelSet: factory(n_tx, n_rx, m_tx, m_rx, seed, k_factor=None)."""

    def make(n_tx: int, n_rx: int, m_tx: int, m_rx: int, seed: int = 0, k_factor=None) -> ChannelSet:
        rng = np.random.default_rng(seed)
        H = complex_gaussian(rng, m_tx, n_tx)
        G = complex_gaussian(rng, n_rx, m_rx)
        C = complex_gaussian(rng, m_rx, m_tx)
        if k_factor is not None:
            C = np.sqrt(k_factor / (k_factor + 1.0)) + np.sqrt(1.0 / (k_factor + 1.0)) * C
        return ChannelSet(H, G, C)

    return make


@pytest.fixture
def unit_power_model() -> PowerModel:
    """μ = 1 with a 1 W static power and no per-element or per-chain terms."""
    return PowerModel(mu=1.0, system_overhead=1.0)


@pytest.fixture
def fast_opts() -> SolverOptions:
    """Options with reduced iteration caps for quick unit tests."""
    return SolverOptions(max_iters=30, max_sfp_iters=30, sfp_tol=1e-7)
