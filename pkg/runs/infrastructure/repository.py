import json
from typing import Any

from sqlalchemy import select
from sqlalchemy.orm import Session

from runs.interfaces import AbstractRunsRepository
from runs.models import RunRecord


class RunsRepository(AbstractRunsRepository):
    """
    Concrete implementation of the AbstractRunsRepository using SQLAlchemy.
    """

    def __init__(self, db: Session):
        self.db = db

    def record_run(
        self,
        command: str,
        status: str,
        config_hash: str,
        seed: int,
        artifact_path: str | None = None,
        summary: dict[str, Any] | None = None,
    ) -> RunRecord:
        """
        Creates a RunRecord and adds it to the session.
        The changes must be flushed or committed to persist the record and get its ID.
        :param summary: Headline figures, stored as sorted-key JSON.
        :return: The created RunRecord instance.
        """
        record = RunRecord(
            command=command,
            status=status,
            config_hash=config_hash,
            seed=seed,
            artifact_path=artifact_path,
            summary=json.dumps(summary or {}, sort_keys=True, default=str),
        )
        self.db.add(record)
        return record

    def get_run_by_id(self, run_id: int) -> RunRecord | None:
        return self.db.get(RunRecord, run_id)

    def get_runs_by_config_hash(self, config_hash: str) -> list[RunRecord]:
        stmt = select(RunRecord).where(RunRecord.config_hash == config_hash).order_by(RunRecord.id)
        return list(self.db.scalars(stmt))

    def get_all_runs(self) -> list[RunRecord]:
        return list(self.db.scalars(select(RunRecord).order_by(RunRecord.id)))

    def flush_changes(self) -> None:
        self.db.flush()
