#!/usr/bin/env python
"""
Tests for the WsRHS Energy Efficiency experiment harness.

This script runs small SISO sweeps end to end and checks the aggregation,
the CSV table and sidecar, the failure budget and the draw store.
"""

import json
import logging
import math

import numpy as np
import pytest

from wsrhs_ee.models.base import get_engine, get_session, init_db
from wsrhs_ee.models.experiment import Architecture, ExperimentConfig, SweepSpec, SweepVariable
from wsrhs_ee.models.results import DrawRecord
from wsrhs_ee.models.scenario import default_scenario
from wsrhs_ee.services.channel_model import ChannelModel
from wsrhs_ee.services.digital_baseline import DIRECT_CHANNEL_NOTE
from wsrhs_ee.services.harness import (
    CSV_COLUMNS,
    DrawOutcome,
    ExperimentRunner,
    SweepResult,
    aggregate,
    emit_csv,
    experiment_id,
    persist_draws,
    run_experiment,
)
from wsrhs_ee.services.solver_siso import solve_siso
from wsrhs_ee.utils.errors import ExperimentError
from wsrhs_ee.utils.units import dbm_to_watts

logger = logging.getLogger("test_harness")


def siso_config(values, draws=2, **kwargs) -> ExperimentConfig:
    return ExperimentConfig(
        name="siso_test",
        scenario=default_scenario(m_tx=4, m_rx=4, seed=7),
        architecture=Architecture.WSRHS_SISO,
        sweep=SweepSpec(values=values),
        monte_carlo_draws=draws,
        **kwargs,
    )


def data_lines(path):
    with open(path) as f:
        return [line for line in f.read().splitlines() if not line.startswith("#")]


def test_siso_draw_matches_direct_solve():
    config = siso_config([0.0, 10.0])
    runner = ExperimentRunner(config)
    outcome = runner.run_draw(1, 0)
    model = ChannelModel(config.scenario)
    scenario = config.scenario
    direct = solve_siso(model.realize(0), model.noise_power, scenario.bandwidth, scenario.power_model, dbm_to_watts(10.0))
    assert not outcome.failed
    assert outcome.ee == pytest.approx(direct.ee, rel=1e-12)
    assert outcome.capacity == pytest.approx(direct.capacity, rel=1e-12)
    assert outcome.outer_iters == 0


def test_csv_has_one_row_per_point(tmp_path):
    result = run_experiment(siso_config([0.0, 10.0, 20.0], output_path=str(tmp_path / "sweep.csv")))
    lines = data_lines(tmp_path / "sweep.csv")
    assert len(lines) == 4
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(result) == 3
    assert result.failures_per_point() == [0, 0, 0]
    meta = json.loads((tmp_path / "sweep.json").read_text())
    assert meta["experiment_id"] == "siso_test:WsRHS_SISO:EE:7"
    assert meta["monte_carlo_draws"] == 2


def test_empty_sweep_writes_header_only(tmp_path):
    result = run_experiment(siso_config([], output_path=str(tmp_path / "empty.csv")))
    assert len(result) == 0
    assert data_lines(tmp_path / "empty.csv") == [",".join(CSV_COLUMNS)]


def test_csv_is_deterministic_across_thread_counts(tmp_path):
    config = siso_config([0.0, 20.0], draws=3)
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    emit_csv(ExperimentRunner(config, threads=1).run(), first)
    emit_csv(ExperimentRunner(config, threads=3).run(), second)
    assert first.read_bytes() == second.read_bytes()


def test_aggregate_sample_statistics():
    outcomes = [
        DrawOutcome(0, 0, 0.0, ee=1.0, capacity=10.0, outer_iters=2),
        DrawOutcome(0, 1, 0.0, ee=3.0, capacity=30.0, outer_iters=4),
        DrawOutcome(1, 0, 5.0, ee=2.0, capacity=20.0, outer_iters=1),
        DrawOutcome(1, 1, 5.0, error="ConditioningError: rank deficient"),
        DrawOutcome(2, 0, 9.0, error="ModelError: zero"),
    ]
    table = aggregate([0.0, 5.0, 9.0], outcomes)
    assert table["mean_ee_bits_per_joule"][0] == pytest.approx(2.0)
    assert table["std_ee"][0] == pytest.approx(math.sqrt(2.0))
    assert table["mean_outer_iters"][0] == pytest.approx(3.0)
    assert table["std_ee"][1] == 0.0
    assert table["failed_draws"].tolist() == [0, 1, 1]
    assert math.isnan(table["mean_capacity_bps"][2])


def test_failure_budget_raises(monkeypatch):
    config = siso_config([0.0], draws=4)

    def broken(self, draw, pm, p_max):
        raise ValueError("forced failure")

    monkeypatch.setattr(ExperimentRunner, "solve", broken)
    with pytest.raises(ExperimentError):
        ExperimentRunner(config).run()


def test_chain_static_sweep_parameters():
    config = ExperimentConfig(
        scenario=default_scenario(m_tx=4, m_rx=4),
        sweep=SweepSpec(variable=SweepVariable.PER_CHAIN_STATIC_DBM, values=[30.0]),
        p_max_dbm=20.0,
    )
    pm, p_max = ExperimentRunner(config).point_parameters(30.0)
    assert p_max == pytest.approx(dbm_to_watts(20.0))
    assert pm.per_chain_static_T == pytest.approx(1.0)
    assert pm.per_chain_static_R == pytest.approx(1.0)


def test_runner_applies_default_time_limit():
    runner = ExperimentRunner(siso_config([0.0]))
    assert runner.opts.time_limit_s == pytest.approx(300.0)
    with pytest.raises(ExperimentError):
        ExperimentRunner(siso_config([0.0]), threads=0)


def test_digital_metadata_carries_channel_note():
    config = ExperimentConfig(
        scenario=default_scenario(n_tx=2, n_rx=2, m_tx=4, m_rx=4),
        architecture=Architecture.DIGITAL_ONLY,
        sweep=SweepSpec(values=[10.0]),
        monte_carlo_draws=1,
    )
    result = ExperimentRunner(config).run()
    assert result.metadata()["digital_channel_note"] == DIRECT_CHANNEL_NOTE
    assert result.failed_draws == 0


def test_persist_draws_upserts():
    engine = get_engine("sqlite:///:memory:")
    init_db(engine)
    session = get_session(engine)
    config = siso_config([0.0, 10.0])
    result = SweepResult(config, [DrawOutcome(0, 0, 0.0, ee=1.0, capacity=2.0, outer_iters=0)])
    assert persist_draws(session, result) == 1
    updated = SweepResult(
        config,
        [
            DrawOutcome(0, 0, 0.0, ee=5.0, capacity=6.0, outer_iters=0),
            DrawOutcome(1, 0, 10.0, error="ModelError: zero"),
        ],
    )
    persist_draws(session, updated)
    records = session.query(DrawRecord).filter(DrawRecord.experiment_id == experiment_id(config)).all()
    assert len(records) == 2
    by_key = {(r.sweep_index, r.draw_index): r for r in records}
    assert by_key[(0, 0)].ee_bits_per_joule == 5.0
    assert by_key[(1, 0)].failed
    session.close()


def test_wsrhs_siso_outperforms_large_digital_array():
    values = [-20.0, -10.0, 0.0, 10.0, 20.0]
    wsrhs = ExperimentConfig(
        name="ordering",
        scenario=default_scenario(m_tx=32, m_rx=32, seed=1),
        architecture=Architecture.WSRHS_SISO,
        sweep=SweepSpec(values=values),
        monte_carlo_draws=3,
    )
    digital = ExperimentConfig(
        name="ordering",
        scenario=default_scenario(n_tx=64, n_rx=64, m_tx=1, m_rx=1, seed=1),
        architecture=Architecture.DIGITAL_ONLY,
        sweep=SweepSpec(values=values),
        monte_carlo_draws=3,
    )
    wsrhs_ee = ExperimentRunner(wsrhs).run().table["mean_ee_bits_per_joule"].to_numpy(dtype=float)
    digital_ee = ExperimentRunner(digital).run().table["mean_ee_bits_per_joule"].to_numpy(dtype=float)
    logger.info(f"Mean EE, WsRHS SISO: {wsrhs_ee}, DigitalOnly: {digital_ee}")
    assert wsrhs_ee.shape == digital_ee.shape == (5,)
    assert np.all(wsrhs_ee > digital_ee)
