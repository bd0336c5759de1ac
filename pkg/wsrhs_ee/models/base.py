"""
Base database models for WsRHS Energy Efficiency.

This module defines the SQLAlchemy base class and the connection helpers of
the optional per-draw result store.
"""

from typing import Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, declarative_base, sessionmaker

from wsrhs_ee.config import config

# Create base class for models
Base = declarative_base()


def get_engine(db_url: Optional[str] = None) -> Engine:
    """
    Create an engine for a database URL.

    Args:
        db_url: SQLAlchemy URL, defaults to the configured store

    Returns:
        A SQLAlchemy engine
    """
    return create_engine(db_url or config.db_url, echo=False)


def get_session(engine: Engine) -> Session:
    """
    Get a database session.

    Returns:
        A SQLAlchemy session object bound to ``engine``.
    """
    factory = sessionmaker(autocommit=False, autoflush=False, bind=engine)
    return factory()


def init_db(engine: Engine) -> None:
    """
    Initialize the database by creating all tables.
    """
    # Register the tables on the metadata before creating them
    from wsrhs_ee.models import results  # noqa: F401

    Base.metadata.create_all(bind=engine)
