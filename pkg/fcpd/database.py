from sqlalchemy import create_engine, Column, String, Integer, BigInteger, DateTime, LargeBinary, Boolean, UniqueConstraint, Index, JSON
from sqlalchemy.orm import declarative_base, sessionmaker
from datetime import datetime
import logging

import numpy as np

from fcpd.config import get_database_url

logger = logging.getLogger(__name__)

Base = declarative_base()


class CriticalValueSample(Base):
    __tablename__ = 'critval_sample'

    id = Column(Integer, primary_key=True, autoincrement=True)
    d = Column(Integer, nullable=False)
    grid_size = Column(Integer, nullable=False)
    replications = Column(Integer, nullable=False)
    seed = Column(BigInteger, nullable=False)
    version = Column(String, nullable=False)
    sample = Column(LargeBinary, nullable=False)  # sorted float64 sup values, no continuity correction
    created_at = Column(DateTime, nullable=False, default=datetime.utcnow)

    __table_args__ = (
        UniqueConstraint('d', 'grid_size', 'replications', 'seed', 'version', name='_critval_key_uc'),
    )

    def __repr__(self):
        return (f"<CriticalValueSample(d={self.d}, grid_size={self.grid_size}, "
                f"replications={self.replications}, seed={self.seed}, version='{self.version}')>")


class SimulationRun(Base):
    __tablename__ = 'simulation_run'

    id = Column(Integer, primary_key=True, autoincrement=True)
    executed_at = Column(DateTime, nullable=False, default=datetime.utcnow)
    command = Column(String, nullable=False)
    seed = Column(BigInteger)
    completed = Column(Boolean, nullable=False, default=False)
    manifest = Column(JSON)  # RunManifest as a dict
    extra_data = Column(JSON)  # rejection rows and summary

    __table_args__ = (
        Index('idx_simulation_run_executed_at', 'executed_at'),
    )

    def __repr__(self):
        return f"<SimulationRun(id={self.id}, command='{self.command}', executed_at='{self.executed_at}')>"


_engine = None
_Session = None
_db_initialized = False


def get_engine():
    db_url = get_database_url()
    return create_engine(db_url, echo=False)


def init_database():
    """Initialize the database (create tables, keys, and indices if they do not exist)"""
    global _db_initialized, _engine
    if not _db_initialized:
        if _engine is None:
            _engine = get_engine()
        Base.metadata.create_all(_engine)  # Idempotent
        _db_initialized = True
        logger.debug("Database initialized successfully")


def get_db_session():
    """Create and return a database session. Initializes DB schema only once per process."""
    global _engine, _Session
    if _engine is None:
        _engine = get_engine()
    if _Session is None:
        _Session = sessionmaker(bind=_engine)
    init_database()
    return _Session()


def reset_engine():
    """Forget the cached engine so the next session picks up a changed FCPD_DATABASE_URL"""
    global _engine, _Session, _db_initialized
    if _engine is not None:
        _engine.dispose()
    _engine = None
    _Session = None
    _db_initialized = False


def load_critval_sample(d: int, grid_size: int, replications: int, seed: int, version: str):
    """Return the cached sorted sample or None"""
    session = get_db_session()
    try:
        row = session.query(CriticalValueSample).filter_by(
            d=d, grid_size=grid_size, replications=replications, seed=seed, version=version
        ).first()
        if row is None:
            return None
        return np.frombuffer(row.sample, dtype=np.float64).copy()
    except Exception as e:
        logger.error(f"Error reading critical value cache: {e}")
        return None
    finally:
        session.close()


def has_critval_sample(d: int, grid_size: int, replications: int, seed: int, version: str) -> bool:
    session = get_db_session()
    try:
        return session.query(CriticalValueSample.id).filter_by(
            d=d, grid_size=grid_size, replications=replications, seed=seed, version=version
        ).first() is not None
    except Exception as e:
        logger.error(f"Error reading critical value cache: {e}")
        return False
    finally:
        session.close()


def save_critval_sample(d: int, grid_size: int, replications: int, seed: int, version: str, sample: np.ndarray):
    session = get_db_session()
    try:
        session.add(CriticalValueSample(
            d=d, grid_size=grid_size, replications=replications, seed=seed, version=version,
            sample=np.ascontiguousarray(sample, dtype=np.float64).tobytes(),
        ))
        session.commit()
    except Exception as e:
        session.rollback()
        logger.error(f"Error writing critical value cache: {e}")
    finally:
        session.close()


def list_critval_keys():
    session = get_db_session()
    try:
        rows = session.query(CriticalValueSample).order_by(CriticalValueSample.d).all()
        return [
            {'d': r.d, 'grid_size': r.grid_size, 'replications': r.replications,
             'seed': r.seed, 'version': r.version, 'created_at': r.created_at.isoformat()}
            for r in rows
        ]
    finally:
        session.close()


def create_run(command: str, seed: int, manifest: dict) -> int:
    """Insert an open SimulationRun and return its id (None if the database is unavailable)"""
    session = get_db_session()
    try:
        run = SimulationRun(command=command, seed=seed, manifest=manifest, extra_data={})
        session.add(run)
        session.commit()
        return run.id
    except Exception as e:
        session.rollback()
        logger.error(f"Error creating simulation run record: {e}")
        return None
    finally:
        session.close()


def complete_run(run_id: int, extra_data: dict):
    if run_id is None:
        return
    session = get_db_session()
    try:
        run = session.get(SimulationRun, run_id)
        if run is not None:
            run.extra_data = extra_data
            run.completed = True
            session.commit()
    except Exception as e:
        session.rollback()
        logger.error(f"Error saving simulation run {run_id}: {e}")
    finally:
        session.close()


def run_to_dict(run: SimulationRun, include_results: bool = True) -> dict:
    data = {
        'id': run.id,
        'executed_at': run.executed_at.isoformat() if run.executed_at else None,
        'command': run.command,
        'seed': run.seed,
        'completed': run.completed,
        'manifest': run.manifest,
    }
    if include_results:
        data['results'] = run.extra_data
    return data
