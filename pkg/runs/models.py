from datetime import datetime, timezone

from sqlalchemy import DateTime, String, Text
from sqlalchemy.orm import Mapped, mapped_column

from core.database import Base

STATUS_OK = "ok"
STATUS_FAILED = "failed"


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class RunRecord(Base):
    """
    One invocation of a pipeline command.

    The ledger is bookkeeping only: nothing in it feeds back into artifacts.

    Table: runs

    Attributes:
        id (int): Unique identifier (primary key).
        command (str): Subcommand name, e.g. `train`.
        status (str): `ok` or `failed`.
        config_hash (str): SHA-256 of the resolved configuration.
        seed (int): Seed the command ran with.
        artifact_path (str | None): Main output written, if any.
        summary (str): JSON text with headline figures or the error message.
        created_at (datetime): When the run was recorded.
    """

    __tablename__ = "runs"

    id: Mapped[int] = mapped_column(primary_key=True, autoincrement=True)
    command: Mapped[str] = mapped_column(String(32))
    status: Mapped[str] = mapped_column(String(16))
    config_hash: Mapped[str] = mapped_column(String(64), index=True)
    seed: Mapped[int]
    artifact_path: Mapped[str | None] = mapped_column(nullable=True)
    summary: Mapped[str] = mapped_column(Text, default="{}")
    created_at: Mapped[datetime] = mapped_column(DateTime(timezone=True), default=_utcnow)

    def __repr__(self) -> str:
        return (
            f"RunRecord(id={self.id}, command='{self.command}', status='{self.status}', "
            f"config_hash='{self.config_hash[:12]}', seed={self.seed}, "
            f"artifact_path='{self.artifact_path}')"
        )
