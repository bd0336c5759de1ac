"""
Experiment configuration models for WsRHS Energy Efficiency.

An ExperimentConfig is the JSON file the harness runs: a scenario, an
architecture, a mode, a sweep and the Monte Carlo settings.
"""

import math
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, field_validator

from wsrhs_ee.models.report import Mode, SolverOptions
from wsrhs_ee.models.scenario import LinkScenario


class Architecture(str, Enum):
    """Transceiver architecture under test."""

    WSRHS_SISO = "WsRHS_SISO"
    WSRHS_SINGLE_STREAM = "WsRHS_SingleStream"
    WSRHS_MULTI_STREAM = "WsRHS_MultiStream"
    DIGITAL_ONLY = "DigitalOnly"


class SweepVariable(str, Enum):
    """Quantity varied along the sweep."""

    P_MAX_DBM = "P_max_dbm"
    PER_CHAIN_STATIC_DBM = "per_chain_static_dbm"


class SweepSpec(BaseModel):
    """Sweep variable and its values."""

    variable: SweepVariable = SweepVariable.P_MAX_DBM
    values: List[float] = []

    @field_validator("values")
    @classmethod
    def validate_values(cls, v: List[float]) -> List[float]:
        """Sweep values must be finite and sorted ascending."""
        if any(not math.isfinite(x) for x in v):
            raise ValueError("sweep values must be finite")
        if any(b < a for a, b in zip(v, v[1:])):
            raise ValueError("sweep values must be sorted ascending")
        return v


class ExperimentConfig(BaseModel):
    """A complete experiment: what to solve, over which sweep, how many draws."""

    name: str = "experiment"
    scenario: LinkScenario
    architecture: Architecture = Architecture.WSRHS_SISO
    mode: Mode = Mode.EE
    sweep: SweepSpec = SweepSpec()
    p_max_dbm: float = 10.0  # fixed P_max when sweeping the per-chain static power
    monte_carlo_draws: int = 100
    solver_opts: SolverOptions = SolverOptions()
    output_path: Optional[str] = None

    @field_validator("monte_carlo_draws")
    @classmethod
    def validate_draws(cls, v: int) -> int:
        """At least one draw per sweep point."""
        if v < 1:
            raise ValueError("monte_carlo_draws must be >= 1")
        return v

    @field_validator("name")
    @classmethod
    def validate_name(cls, v: str) -> str:
        """Names are used in file names and store keys."""
        v = v.strip()
        if not v:
            raise ValueError("name must not be empty")
        return v
