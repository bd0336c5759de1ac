"""
Solver options and solve reports for WsRHS Energy Efficiency.

This module defines the option set shared by every iterative solver, the
report returned alongside each solution, and a wall-clock deadline helper.
"""

import time
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, field_validator

from wsrhs_ee.utils.errors import SolverTimeoutError


class Termination(str, Enum):
    """Reason an iterative solver stopped."""

    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    INFEASIBLE = "Infeasible"


class Mode(str, Enum):
    """Optimization target: energy efficiency or capacity (EE with μ = 0)."""

    EE = "EE"
    CAPACITY = "Capacity"


class SolverOptions(BaseModel):
    """Tolerances and iteration caps for the convex engines and outer loops."""

    # Outer alternating loops
    max_iters: int = 200
    sfp_tol: float = 1e-6  # relative objective change ending SFP/alternating loops
    max_sfp_iters: int = 100

    # Dinkelbach
    obj_tol: float = 1e-8
    max_dinkelbach_iters: int = 50

    # Barrier method
    feas_tol: float = 1e-8
    barrier_mu: float = 20.0
    inner_tol: float = 1e-10  # duality-gap bound m/t ending the barrier method
    max_newton_iters: int = 100
    max_barrier_stages: int = 60

    # Wall clock per top-level solve, None for unlimited
    time_limit_s: Optional[float] = None

    @field_validator(
        "max_iters", "max_sfp_iters", "max_dinkelbach_iters", "max_newton_iters", "max_barrier_stages"
    )
    @classmethod
    def validate_counts(cls, v: int) -> int:
        """Iteration caps must be positive."""
        if v < 1:
            raise ValueError("iteration caps must be >= 1")
        return v

    @field_validator("sfp_tol", "obj_tol", "feas_tol", "inner_tol")
    @classmethod
    def validate_tolerances(cls, v: float) -> float:
        """Tolerances must be positive."""
        if not v > 0:
            raise ValueError("tolerances must be > 0")
        return v

    @field_validator("barrier_mu")
    @classmethod
    def validate_barrier_mu(cls, v: float) -> float:
        """The barrier growth factor must exceed one."""
        if not v > 1:
            raise ValueError("barrier_mu must be > 1")
        return v

    @field_validator("time_limit_s")
    @classmethod
    def validate_time_limit(cls, v: Optional[float]) -> Optional[float]:
        """Time limits must be positive when given."""
        if v is not None and not v > 0:
            raise ValueError("time_limit_s must be > 0")
        return v


class SolveReport:
    """Trajectory and termination data of one solve."""

    def __init__(
        self,
        objective_trace: Optional[List[float]] = None,
        iterations: int = 0,
        termination: Termination = Termination.CONVERGED,
        kkt_residual: float = 0.0,
        constraint_residuals: Optional[List[float]] = None,
        notes: Optional[List[str]] = None,
        certificate: Optional[float] = None,
        diagnostics: Optional[Dict[str, float]] = None,
    ):
        """
        Initialize a solve report.

        Args:
            objective_trace: Objective value after each iteration, first entry at the start point
            iterations: Number of iterations performed
            termination: Reason the solver stopped
            kkt_residual: Final optimality residual (duality-gap bound for barrier solves)
            constraint_residuals: Final constraint values, nonpositive when feasible
            notes: Regularization and safeguard notices
            certificate: |F(η)| at the last Dinkelbach step, when applicable
            diagnostics: Named scalar diagnostics such as rank ratios
        """
        self.objective_trace = objective_trace or []
        self.iterations = iterations
        self.termination = termination
        self.kkt_residual = kkt_residual
        self.constraint_residuals = constraint_residuals or []
        self.notes = notes or []
        self.certificate = certificate
        self.diagnostics = diagnostics or {}

    @property
    def final_objective(self) -> Optional[float]:
        """Last objective value, or None for an empty trace."""
        return self.objective_trace[-1] if self.objective_trace else None

    def is_nondecreasing(self, slack: float = 0.0) -> bool:
        """Check that the objective trace never drops by more than ``slack``."""
        trace = self.objective_trace
        return all(b >= a - slack for a, b in zip(trace, trace[1:]))

    def add_note(self, note: str) -> None:
        """Record a notice once."""
        if note not in self.notes:
            self.notes.append(note)

    def to_dict(self) -> Dict:
        """Convert the report to a dictionary for serialization."""
        return {
            "objective_trace": [float(v) for v in self.objective_trace],
            "iterations": self.iterations,
            "termination": self.termination.value,
            "kkt_residual": float(self.kkt_residual),
            "constraint_residuals": [float(v) for v in self.constraint_residuals],
            "notes": list(self.notes),
            "certificate": None if self.certificate is None else float(self.certificate),
            "diagnostics": {k: float(v) for k, v in self.diagnostics.items()},
        }

    def __repr__(self) -> str:
        return (
            f"<SolveReport iterations={self.iterations} termination={self.termination.value} "
            f"final={self.final_objective}>"
        )


class Deadline:
    """Wall-clock budget checked between outer iterations."""

    def __init__(self, limit_s: Optional[float]):
        self.limit_s = limit_s
        self.expires = None if limit_s is None else time.monotonic() + limit_s

    def check(self, where: str) -> None:
        """Raise SolverTimeoutError once the budget is spent."""
        if self.expires is not None and time.monotonic() > self.expires:
            raise SolverTimeoutError(f"{where} exceeded the {self.limit_s:.1f} s time limit")
