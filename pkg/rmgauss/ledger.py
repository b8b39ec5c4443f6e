"""
Optional SQLite ledger of experiment runs and their events.
"""
import json
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional

from sqlmodel import Field, Session, SQLModel, create_engine, select


class RunStatus(str, Enum):
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"
    STORM = "storm"
    NOT_CONVERGED = "not_converged"


class EventLevel(str, Enum):
    INFO = "info"
    WARN = "warn"
    ERROR = "error"


class ExperimentRun(SQLModel, table=True):
    id: Optional[int] = Field(default=None, primary_key=True)
    name: str = Field(index=True)
    command: str
    seed: Optional[int] = None
    status: RunStatus = Field(default=RunStatus.PENDING, index=True)
    sigma_total: Optional[int] = None
    final_norm: Optional[float] = None
    wall_time: Optional[float] = None
    exit_code: Optional[int] = None
    output_dir: Optional[str] = None
    config_json: str = Field(default="{}", description="Config echo as JSON text")
    created_at: datetime = Field(default_factory=datetime.utcnow)
    updated_at: datetime = Field(default_factory=datetime.utcnow)


class RunEvent(SQLModel, table=True):
    id: Optional[int] = Field(default=None, primary_key=True)
    run_id: int = Field(foreign_key="experimentrun.id", index=True)
    ts: datetime = Field(default_factory=datetime.utcnow)
    level: EventLevel
    message: str


def dict_to_json(d: Dict[str, Any]) -> str:
    return json.dumps(d, sort_keys=True) if d else "{}"


class RunLedger:
    """Records runs and events; sweep workers may share one ledger (sessions are per call)."""

    def __init__(self, url: str):
        self.url = url
        connect_args = {"check_same_thread": False} if url.startswith("sqlite") else {}
        self.engine = create_engine(url, echo=False, connect_args=connect_args)
        SQLModel.metadata.create_all(self.engine)

    def start_run(self, name: str, command: str, seed: Optional[int] = None,
                  output_dir: Optional[str] = None, config: Optional[Dict[str, Any]] = None) -> int:
        run = ExperimentRun(
            name=name,
            command=command,
            seed=seed,
            status=RunStatus.RUNNING,
            output_dir=output_dir,
            config_json=dict_to_json(config or {}),
        )
        with Session(self.engine) as session:
            session.add(run)
            session.commit()
            session.refresh(run)
            run_id = run.id
        self.add_event(run_id, EventLevel.INFO, f"{command} started")
        return run_id

    def add_event(self, run_id: int, level: EventLevel, message: str) -> None:
        with Session(self.engine) as session:
            session.add(RunEvent(run_id=run_id, level=level, message=message))
            session.commit()

    def finish_run(self, run_id: int, status: RunStatus, exit_code: int, **fields) -> None:
        with Session(self.engine) as session:
            run = session.get(ExperimentRun, run_id)
            if run is None:
                raise KeyError(f"no run with id {run_id}")
            run.status = status
            run.exit_code = exit_code
            for key, value in fields.items():
                if value is not None and hasattr(run, key):
                    setattr(run, key, value)
            run.updated_at = datetime.utcnow()
            session.add(run)
            session.commit()
        level = EventLevel.INFO if exit_code == 0 else EventLevel.ERROR
        self.add_event(run_id, level, f"finished with status {status.value} (exit {exit_code})")

    def list_runs(self, status: Optional[RunStatus] = None) -> List[ExperimentRun]:
        with Session(self.engine) as session:
            query = select(ExperimentRun)
            if status is not None:
                query = query.where(ExperimentRun.status == status)
            return list(session.exec(query.order_by(ExperimentRun.id)).all())

    def events(self, run_id: int) -> List[RunEvent]:
        with Session(self.engine) as session:
            query = select(RunEvent).where(RunEvent.run_id == run_id).order_by(RunEvent.id)
            return list(session.exec(query).all())
