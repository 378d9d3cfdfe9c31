from __future__ import annotations

import json
import os
from datetime import datetime, timezone
from functools import lru_cache
from typing import Any, List, Optional

from sqlalchemy import Column, DateTime, Integer, String, Text, create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import declarative_base, sessionmaker

UTC = timezone.utc  # datetime.UTC alias requires Python 3.11+

DEFAULT_DB_URL = "sqlite:///veriwall.db"

Base = declarative_base()


class RunRecord(Base):
    __tablename__ = "runs"
    id = Column(Integer, primary_key=True)
    run_id = Column(String, index=True, unique=True)
    command = Column(String)
    created_at = Column(DateTime, default=lambda: datetime.now(UTC))


class Event(Base):
    __tablename__ = "events"
    id = Column(Integer, primary_key=True)
    run_id = Column(String, index=True)
    kind = Column(String, index=True)
    data = Column(Text)
    created_at = Column(DateTime, default=lambda: datetime.now(UTC))


def db_url() -> str:
    return os.getenv("VERIWALL_DB_URL", DEFAULT_DB_URL)


@lru_cache(maxsize=None)
def _engine(url: str) -> Engine:
    return create_engine(url, echo=False, future=True)


def session_factory(url: Optional[str] = None) -> sessionmaker:
    """Sessions bound to the ledger at `url` (VERIWALL_DB_URL by default)."""
    return sessionmaker(bind=_engine(url or db_url()), autoflush=False, autocommit=False)


def init_db(url: Optional[str] = None) -> None:
    Base.metadata.create_all(bind=_engine(url or db_url()))


def _encode(data: Any) -> str:
    if data is None:
        return ""
    if isinstance(data, str):
        return data
    return json.dumps(data, sort_keys=True)


def open_run(run_id: str, command: str, url: Optional[str] = None) -> None:
    with session_factory(url)() as db:
        if db.query(RunRecord).filter_by(run_id=run_id).first() is None:
            db.add(RunRecord(run_id=run_id, command=command))
            db.commit()


def log_event(run_id: str, kind: str, data: Any = None, url: Optional[str] = None) -> None:
    with session_factory(url)() as db:
        db.add(Event(run_id=run_id, kind=kind, data=_encode(data)))
        db.commit()


def run_events(run_id: str, url: Optional[str] = None) -> List[Event]:
    with session_factory(url)() as db:
        return db.query(Event).filter_by(run_id=run_id).order_by(Event.id).all()
