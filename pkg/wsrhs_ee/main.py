#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
WsRHS Energy Efficiency - Command Line Entry Point

This module parses the command line, loads an experiment file, runs the
Monte Carlo sweep and writes the CSV table, the JSON sidecar and optionally
the per-draw records.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from wsrhs_ee.config import config, log_level
from wsrhs_ee.models.base import get_engine, get_session, init_db
from wsrhs_ee.models.experiment import ExperimentConfig
from wsrhs_ee.models.report import Mode
from wsrhs_ee.services.harness import run_experiment
from wsrhs_ee.utils.errors import WsrhsError
from wsrhs_ee.utils.logger import setup_logger

logger = logging.getLogger("wsrhs_ee")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with the ``run`` subcommand."""
    parser = argparse.ArgumentParser(description="Energy-efficiency sweeps for WsRHS-assisted MIMO links")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run an experiment file")
    run.add_argument("config", type=str, help="Path to the experiment JSON file")
    run.add_argument("--seed", type=int, help="Override the scenario seed")
    run.add_argument("--draws", type=int, help="Override the number of Monte Carlo draws")
    run.add_argument("--out", type=str, help="Output CSV path (sidecar gets the same stem)")
    run.add_argument("--threads", type=int, default=config.default_threads, help="Worker threads")
    run.add_argument("--mode", choices=[m.value for m in Mode], help="Override the optimization mode")
    run.add_argument("--db", type=str, help="SQLAlchemy URL of the draw store")
    run.add_argument("--log-level", type=str, default=log_level, help="Logging level")
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """
    Load the experiment file and apply command-line overrides.

    Args:
        args: Parsed arguments of the ``run`` subcommand

    Returns:
        A validated ExperimentConfig
    """
    text = Path(args.config).read_text()
    cfg = ExperimentConfig.model_validate_json(text)
    update = {}
    if args.seed is not None:
        update["scenario"] = {**cfg.scenario.model_dump(), "seed": args.seed}
    if args.draws is not None:
        update["monte_carlo_draws"] = args.draws
    if args.mode is not None:
        update["mode"] = Mode(args.mode)
    if args.out is not None:
        update["output_path"] = args.out
    if update:
        # Re-validate so overrides obey the same invariants as the file
        cfg = ExperimentConfig.model_validate({**cfg.model_dump(), **update})
    if cfg.output_path is None:
        cfg = cfg.model_copy(update={"output_path": str(config.results_dir / f"{cfg.name}.csv")})
    return cfg


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the command line."""
    args = build_parser().parse_args(argv)
    setup_logger("wsrhs_ee", args.log_level, config.logs_dir)

    try:
        cfg = load_config(args)
    except (OSError, ValidationError) as e:
        logger.error(f"Cannot load experiment file {args.config}: {e}")
        return 2

    session = None
    if args.db:
        engine = get_engine(args.db)
        init_db(engine)
        session = get_session(engine)

    try:
        result = run_experiment(cfg, threads=args.threads, session=session)
    except WsrhsError as e:
        logger.error(f"Experiment {cfg.name} failed: {e}")
        return 1
    finally:
        if session is not None:
            session.close()

    print(result.table.to_string(index=False))
    logger.info(f"Results written to {cfg.output_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
