"""
Models for WsRHS Energy Efficiency

This package contains the scenario, state, report and experiment models and
the per-draw result store.
"""

from wsrhs_ee.models.base import Base, get_engine, get_session, init_db
from wsrhs_ee.models.experiment import Architecture, ExperimentConfig, SweepSpec, SweepVariable
from wsrhs_ee.models.report import Deadline, Mode, SolveReport, SolverOptions, Termination
from wsrhs_ee.models.results import DrawRecord
from wsrhs_ee.models.scenario import (
    ArrayGeometry,
    LinkScenario,
    PowerModel,
    build_layout,
    default_scenario,
)
from wsrhs_ee.models.state import (
    ChannelSet,
    SurfaceState,
    TransmitKind,
    TransmitState,
    as_transmit_state,
)
