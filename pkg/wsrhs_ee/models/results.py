"""
Draw record model for WsRHS Energy Efficiency.

This module defines the DrawRecord SQLAlchemy model holding the outcome of one
Monte Carlo draw at one sweep point.
"""

from datetime import datetime
from typing import Dict

from sqlalchemy import Boolean, Column, DateTime, Float, Integer, String, Text, UniqueConstraint

from wsrhs_ee.models.base import Base


class DrawRecord(Base):
    """Model representing one solved (or failed) Monte Carlo draw."""

    __tablename__ = "draw_records"
    __table_args__ = (
        UniqueConstraint("experiment_id", "sweep_index", "draw_index", name="uq_draw_key"),
    )

    id = Column(Integer, primary_key=True)
    experiment_id = Column(String, index=True, nullable=False)
    sweep_index = Column(Integer, nullable=False)
    draw_index = Column(Integer, nullable=False)
    sweep_value = Column(Float, nullable=False)
    ee_bits_per_joule = Column(Float, nullable=True)
    capacity_bps = Column(Float, nullable=True)
    outer_iters = Column(Integer, nullable=True)
    failed = Column(Boolean, default=False, nullable=False)
    error = Column(Text, nullable=True)
    wall_time_s = Column(Float, nullable=True)
    created_at = Column(DateTime, default=datetime.utcnow)

    def to_dict(self) -> Dict:
        """Convert the record to a dictionary for serialization."""
        return {
            "experiment_id": self.experiment_id,
            "sweep_index": self.sweep_index,
            "draw_index": self.draw_index,
            "sweep_value": self.sweep_value,
            "ee_bits_per_joule": self.ee_bits_per_joule,
            "capacity_bps": self.capacity_bps,
            "outer_iters": self.outer_iters,
            "failed": self.failed,
            "error": self.error,
            "wall_time_s": self.wall_time_s,
        }

    def __repr__(self) -> str:
        return (
            f"<DrawRecord experiment={self.experiment_id} point={self.sweep_index} "
            f"draw={self.draw_index} ee={self.ee_bits_per_joule}>"
        )
