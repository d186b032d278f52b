import csv
import json
import logging
from pathlib import Path
from typing import Any

from matchscore.models import MatchScoreResult
from matchscore.service import summarize

logger = logging.getLogger(__name__)

SCORE_COLUMNS = ("pairing_kind", "speaker_id", "score")


def write_scores_csv(result: MatchScoreResult, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(SCORE_COLUMNS)
        for record in result.all_records():
            writer.writerow([record.kind.label, record.speaker_id, repr(record.score)])
    logger.info("Match scores written to %s", path)
    return path


def write_box_stats_json(result: MatchScoreResult, path: str | Path, **metadata: Any) -> Path:
    """Per-kind box statistics plus the list of kinds without eligible pairs."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "box_stats": {kind.label: stats.to_dict() for kind, stats in summarize(result).items()},
        "no_eligible_pairs": [kind.label for kind in result.missing],
        "kinds": [kind.label for kind in result.kinds],
    }
    if metadata:
        payload["run"] = metadata
    path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    return path


def read_box_stats_json(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
