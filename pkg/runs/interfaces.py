from abc import ABC, abstractmethod
from typing import Any

from runs.models import RunRecord


class AbstractRunsRepository(ABC):
    """
    Abstract interface for working with the run ledger.
    Isolates the commands from the database implementation details.
    """

    @abstractmethod
    def record_run(
        self,
        command: str,
        status: str,
        config_hash: str,
        seed: int,
        artifact_path: str | None = None,
        summary: dict[str, Any] | None = None,
    ) -> RunRecord:
        """Creates and adds a RunRecord to the session."""
        pass

    @abstractmethod
    def get_run_by_id(self, run_id: int) -> RunRecord | None:
        """Retrieves a run by ID."""
        pass

    @abstractmethod
    def get_runs_by_config_hash(self, config_hash: str) -> list[RunRecord]:
        """Retrieves every run made with one configuration."""
        pass

    @abstractmethod
    def get_all_runs(self) -> list[RunRecord]:
        """Retrieves all runs, oldest first."""
        pass

    @abstractmethod
    def flush_changes(self) -> None:
        """Forces writing changes to the database to obtain the ID."""
        pass
