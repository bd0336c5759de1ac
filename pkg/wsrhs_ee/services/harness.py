"""
Experiment Harness Service for WsRHS Energy Efficiency.

This module runs seeded Monte Carlo sweeps: for every sweep value and draw it
synthesizes the channels, dispatches to the architecture's solver and records
the outcome. Results are aggregated with pandas and written as a CSV table
plus a JSON metadata sidecar; per-draw records can also be stored in the
SQLAlchemy draw store.
"""

import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from sqlalchemy.orm import Session

from wsrhs_ee import __version__
from wsrhs_ee.config import config as app_config
from wsrhs_ee.models.experiment import Architecture, ExperimentConfig, SweepVariable
from wsrhs_ee.models.results import DrawRecord
from wsrhs_ee.models.scenario import PowerModel
from wsrhs_ee.services.channel_model import ChannelModel
from wsrhs_ee.services.digital_baseline import DIRECT_CHANNEL_NOTE, solve_digital
from wsrhs_ee.services.solver_multi_stream import alternate_multi_stream
from wsrhs_ee.services.solver_single_stream import alternate_single_stream
from wsrhs_ee.services.solver_siso import solve_siso
from wsrhs_ee.utils.errors import ExperimentError
from wsrhs_ee.utils.units import dbm_to_watts

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "sweep_value",
    "mean_ee_bits_per_joule",
    "std_ee",
    "mean_capacity_bps",
    "std_capacity",
    "mean_outer_iters",
    "failed_draws",
]

CSV_HEADER = (
    "# WsRHS energy-efficiency sweep\n"
    "# sweep_value: dBm; ee columns: bits/Joule; capacity columns: bits/s\n"
    "# std columns: sample standard deviation over successful draws (0 for a single draw)\n"
)


class DrawOutcome:
    """Outcome of one Monte Carlo draw at one sweep point."""

    def __init__(
        self,
        sweep_index: int,
        draw_index: int,
        sweep_value: float,
        ee: Optional[float] = None,
        capacity: Optional[float] = None,
        outer_iters: Optional[int] = None,
        error: Optional[str] = None,
        wall_time_s: float = 0.0,
    ):
        self.sweep_index = sweep_index
        self.draw_index = draw_index
        self.sweep_value = sweep_value
        self.ee = ee
        self.capacity = capacity
        self.outer_iters = outer_iters
        self.error = error
        self.wall_time_s = wall_time_s

    @property
    def failed(self) -> bool:
        return self.error is not None

    @property
    def key(self) -> Tuple[int, int]:
        return self.sweep_index, self.draw_index

    def to_dict(self) -> Dict:
        return {
            "sweep_index": self.sweep_index,
            "draw_index": self.draw_index,
            "sweep_value": self.sweep_value,
            "ee": self.ee,
            "capacity": self.capacity,
            "outer_iters": self.outer_iters,
            "failed": self.failed,
            "error": self.error,
            "wall_time_s": self.wall_time_s,
        }

    def __repr__(self) -> str:
        status = "failed" if self.failed else f"ee={self.ee:.6g}"
        return f"<DrawOutcome point={self.sweep_index} draw={self.draw_index} {status}>"


class SweepResult:
    """Aggregated sweep table plus the per-draw outcomes it was built from."""

    def __init__(self, config: ExperimentConfig, outcomes: List[DrawOutcome]):
        self.config = config
        self.outcomes = sorted(outcomes, key=lambda o: o.key)
        self.table = aggregate(config.sweep.values, self.outcomes)

    @property
    def experiment_id(self) -> str:
        return experiment_id(self.config)

    @property
    def failed_draws(self) -> int:
        return sum(1 for o in self.outcomes if o.failed)

    def failures_per_point(self) -> List[int]:
        return [int(v) for v in self.table["failed_draws"]]

    def metadata(self) -> Dict:
        """Sidecar content: resolved configuration, version and notes."""
        meta = {
            "experiment_id": self.experiment_id,
            "version": __version__,
            "architecture": self.config.architecture.value,
            "mode": self.config.mode.value,
            "sweep_variable": self.config.sweep.variable.value,
            "monte_carlo_draws": self.config.monte_carlo_draws,
            "failed_draws_per_point": self.failures_per_point(),
            "config": self.config.model_dump(mode="json"),
        }
        if self.config.architecture == Architecture.DIGITAL_ONLY:
            meta["digital_channel_note"] = DIRECT_CHANNEL_NOTE
        return meta

    def __len__(self) -> int:
        return len(self.table)

    def __repr__(self) -> str:
        return f"<SweepResult {self.experiment_id} points={len(self)} failed={self.failed_draws}>"


def experiment_id(config: ExperimentConfig) -> str:
    """Store key of an experiment: name, architecture, mode and seed."""
    return f"{config.name}:{config.architecture.value}:{config.mode.value}:{config.scenario.seed}"


def aggregate(values: List[float], outcomes: List[DrawOutcome]) -> pd.DataFrame:
    """
    Per-point means and sample standard deviations over successful draws.

    Args:
        values: Sweep values, one row each
        outcomes: Draw outcomes keyed by sweep index

    Returns:
        DataFrame with the CSV columns, one row per sweep value
    """
    frame = pd.DataFrame(
        [o.to_dict() for o in outcomes],
        columns=["sweep_index", "ee", "capacity", "outer_iters", "failed"],
    )
    rows = []
    for i, value in enumerate(values):
        point = frame[frame["sweep_index"] == i]
        ok = point[~point["failed"].astype(bool)]
        n_ok = len(ok)
        rows.append(
            {
                "sweep_value": float(value),
                "mean_ee_bits_per_joule": ok["ee"].astype(float).mean() if n_ok else math.nan,
                "std_ee": ok["ee"].astype(float).std(ddof=1) if n_ok > 1 else 0.0,
                "mean_capacity_bps": ok["capacity"].astype(float).mean() if n_ok else math.nan,
                "std_capacity": ok["capacity"].astype(float).std(ddof=1) if n_ok > 1 else 0.0,
                "mean_outer_iters": ok["outer_iters"].astype(float).mean() if n_ok else math.nan,
                "failed_draws": int(len(point) - n_ok),
            }
        )
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def emit_csv(result: SweepResult, path) -> Path:
    """
    Write the sweep table: units comment block, header row, one row per point.

    Args:
        result: Sweep result
        path: Output file

    Returns:
        The written path
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as f:
            f.write(CSV_HEADER)
            result.table.to_csv(f, index=False, float_format="%.12g")
    except OSError as e:
        raise ExperimentError(f"cannot write sweep table to {path}: {e}") from e
    logger.info(f"Sweep table written to {path}")
    return path


def emit_metadata(result: SweepResult, path) -> Path:
    """Write the JSON sidecar next to the CSV (same stem, .json)."""
    path = Path(path).with_suffix(".json")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(result.metadata(), f, indent=2)
    except OSError as e:
        raise ExperimentError(f"cannot write metadata to {path}: {e}") from e
    return path


def persist_draws(session: Session, result: SweepResult) -> int:
    """
    Store every draw outcome, replacing records with the same key.

    Args:
        session: SQLAlchemy session on an initialized store
        result: Sweep result

    Returns:
        Number of records written
    """
    exp_id = result.experiment_id
    existing = {
        (r.sweep_index, r.draw_index): r
        for r in session.query(DrawRecord).filter(DrawRecord.experiment_id == exp_id).all()
    }
    for o in result.outcomes:
        record = existing.get(o.key)
        if record is None:
            record = DrawRecord(experiment_id=exp_id, sweep_index=o.sweep_index, draw_index=o.draw_index)
            session.add(record)
        record.sweep_value = o.sweep_value
        record.ee_bits_per_joule = o.ee
        record.capacity_bps = o.capacity
        record.outer_iters = o.outer_iters
        record.failed = o.failed
        record.error = o.error
        record.wall_time_s = o.wall_time_s
    try:
        session.commit()
    except Exception:
        session.rollback()
        raise
    logger.info(f"Stored {len(result.outcomes)} draw records for {exp_id}")
    return len(result.outcomes)


class ExperimentRunner:
    """Runs one experiment configuration over a worker pool."""

    def __init__(self, config: ExperimentConfig, threads: int = 1):
        """
        Initialize the runner.

        Args:
            config: Experiment configuration
            threads: Worker count; results do not depend on it
        """
        if threads < 1:
            raise ExperimentError(f"threads must be >= 1, got {threads}")
        self.config = config
        self.threads = threads
        self.channel_model = ChannelModel(config.scenario)
        opts = config.solver_opts
        if opts.time_limit_s is None:
            opts = opts.model_copy(update={"time_limit_s": app_config.draw_time_limit_s})
        self.opts = opts

    def point_parameters(self, value: float) -> Tuple[PowerModel, float]:
        """Power model and P_max in Watts at one sweep value."""
        pm = self.config.scenario.power_model
        if self.config.sweep.variable == SweepVariable.PER_CHAIN_STATIC_DBM:
            return pm.with_chain_static(dbm_to_watts(value)), dbm_to_watts(self.config.p_max_dbm)
        return pm, dbm_to_watts(value)

    def solve(self, draw: int, pm: PowerModel, p_max: float):
        """Solve one draw with the configured architecture; returns the solution object."""
        scenario = self.config.scenario
        sigma2 = self.channel_model.noise_power
        mode = self.config.mode
        arch = self.config.architecture
        if arch == Architecture.DIGITAL_ONLY:
            h_d = self.channel_model.direct_channel(draw)
            return solve_digital(h_d, sigma2, scenario.bandwidth, pm, p_max, self.opts, mode)
        channels = self.channel_model.realize(draw)
        if arch == Architecture.WSRHS_SISO:
            return solve_siso(channels, sigma2, scenario.bandwidth, pm, p_max, mode)
        if arch == Architecture.WSRHS_SINGLE_STREAM:
            return alternate_single_stream(channels, pm, p_max, sigma2, scenario.bandwidth, self.opts, mode)
        return alternate_multi_stream(channels, pm, p_max, sigma2, scenario.bandwidth, self.opts, mode)

    def run_draw(self, sweep_index: int, draw: int) -> DrawOutcome:
        """Solve one (sweep point, draw) pair, recording failures instead of raising."""
        value = self.config.sweep.values[sweep_index]
        start = time.monotonic()
        try:
            pm, p_max = self.point_parameters(value)
            solution = self.solve(draw, pm, p_max)
            return DrawOutcome(
                sweep_index,
                draw,
                value,
                float(solution.ee),
                float(solution.capacity),
                int(solution.outer_iterations),
                wall_time_s=time.monotonic() - start,
            )
        except Exception as e:
            logger.error(f"Draw {draw} at sweep value {value} failed: {e}", exc_info=True)
            return DrawOutcome(
                sweep_index, draw, value, error=f"{type(e).__name__}: {e}", wall_time_s=time.monotonic() - start
            )

    def run(self) -> SweepResult:
        """
        Run every (sweep point, draw) pair.

        Returns:
            SweepResult

        Raises:
            ExperimentError: if more than the allowed fraction of draws fail
        """
        cfg = self.config
        keys = [(i, d) for i in range(len(cfg.sweep.values)) for d in range(cfg.monte_carlo_draws)]
        logger.info(
            f"Running {experiment_id(cfg)}: {len(cfg.sweep.values)} points x {cfg.monte_carlo_draws} draws "
            f"on {self.threads} thread(s)"
        )
        if self.threads == 1:
            outcomes = [self.run_draw(i, d) for i, d in keys]
        else:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                outcomes = list(pool.map(lambda k: self.run_draw(*k), keys))

        result = SweepResult(cfg, outcomes)
        if keys and result.failed_draws > app_config.max_failed_fraction * len(keys):
            raise ExperimentError(
                f"{result.failed_draws} of {len(keys)} draws failed "
                f"(limit {app_config.max_failed_fraction:.0%})"
            )
        logger.info(f"Finished {experiment_id(cfg)}: {result.failed_draws} failed draw(s)")
        return result


def run_experiment(
    config: ExperimentConfig,
    threads: int = 1,
    session: Optional[Session] = None,
) -> SweepResult:
    """
    Run an experiment and write its outputs.

    The CSV and sidecar are written when ``config.output_path`` is set; draw
    records are stored when a session is given.

    Args:
        config: Experiment configuration
        threads: Worker count
        session: Optional draw-store session

    Returns:
        SweepResult
    """
    result = ExperimentRunner(config, threads).run()
    if config.output_path:
        emit_csv(result, config.output_path)
        emit_metadata(result, config.output_path)
    if session is not None:
        persist_draws(session, result)
    if not np.all(np.isfinite(result.table["mean_ee_bits_per_joule"].to_numpy(dtype=float))):
        logger.warning("Some sweep points have no successful draw")
    return result
