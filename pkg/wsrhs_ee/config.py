"""
Configuration module for WsRHS Energy Efficiency.

This module defines application-level settings using Pydantic. Scenario and
experiment settings live in ``wsrhs_ee.models``.
"""

import os
from pathlib import Path

from pydantic import BaseModel, field_validator


class AppConfig(BaseModel):
    """Application configuration settings."""

    # Application metadata
    app_name: str = "WsRHS Energy Efficiency"
    app_version: str = "0.1.0"

    # Directory paths
    data_dir: Path = Path("data")
    logs_dir: Path = Path("logs")
    results_dir: Path = Path("results")

    # Sample experiment files
    json_dir: Path = Path("data/json")

    # Draw store; the CLI only writes to it when --db is given
    db_url: str = f"sqlite:///{os.path.abspath(os.path.join(os.path.dirname(os.path.dirname(__file__)), 'wsrhs_draws.db'))}"

    # Experiment execution
    default_threads: int = 1
    draw_time_limit_s: float = 300.0
    max_failed_fraction: float = 0.2

    @field_validator("logs_dir", "results_dir")
    @classmethod
    def validate_directory(cls, v: Path) -> Path:
        """Validate that the directory exists or create it."""
        v.mkdir(parents=True, exist_ok=True)
        return v

    @field_validator("default_threads")
    @classmethod
    def validate_threads(cls, v: int) -> int:
        """Require at least one worker."""
        if v < 1:
            raise ValueError("default_threads must be >= 1")
        return v


# Create the default configuration
config = AppConfig()

# Logging configuration
log_level = "INFO"  # Change this to "DEBUG" to trace solver iterations
