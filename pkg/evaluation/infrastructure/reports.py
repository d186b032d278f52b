import csv
import json
import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from evaluation.models import ConfusionMatrix, EvalReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResultsRow:
    """One line of the recognition / detection results table; a missing figure prints as '-'."""

    name: str
    recognition: float | None = None
    detection: float | None = None


def write_report_json(report: EvalReport, path: str | Path, **metadata: Any) -> Path:
    """Writes the report with sorted keys; `metadata` lands under `run`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = report.to_dict()
    if metadata:
        payload["run"] = metadata
    path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
    logger.info("Report written to %s", path)
    return path


def read_report_json(path: str | Path) -> EvalReport:
    return EvalReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def write_confusion_csv(cm: ConfusionMatrix, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["true\\pred", *[str(c) for c in cm.classes]])
        for label, row in zip(cm.classes, cm.counts, strict=True):
            writer.writerow([str(label), *row.tolist()])
    return path


def format_confusion(cm: ConfusionMatrix) -> str:
    labels = [str(c) for c in cm.classes]
    width = max(8, *(len(label) for label in labels)) + 2
    lines = ["true\\pred".ljust(width) + "".join(label.rjust(width) for label in labels)]
    for label, row in zip(labels, cm.counts, strict=True):
        lines.append(label.ljust(width) + "".join(str(v).rjust(width) for v in row))
    return "\n".join(lines)


def _pct(value: float | None) -> str:
    return "-" if value is None else f"{100.0 * value:.1f}"


def format_results_table(rows: Sequence[ResultsRow]) -> str:
    """Accuracy in percent for emotion recognition (ER) and emotion detection (ED)."""
    width = max(len("Algorithm"), *(len(r.name) for r in rows)) + 2
    lines = [f"{'Algorithm'.ljust(width)}{'ER':>8}{'ED':>8}"]
    for row in rows:
        lines.append(f"{row.name.ljust(width)}{_pct(row.recognition):>8}{_pct(row.detection):>8}")
    return "\n".join(lines)


def format_class_f1_table(rows: Mapping[str, EvalReport], classes: Sequence[str]) -> str:
    """Per-class F1 in percent, one row per report."""
    classes = [str(c) for c in classes]
    width = max(len("Algorithm"), *(len(name) for name in rows)) + 2
    col = max(8, *(len(c) + 2 for c in classes))
    lines = ["Algorithm".ljust(width) + "".join(c.rjust(col) for c in classes)]
    for name, report in rows.items():
        cells = [
            _pct(report.per_class[c].f1) if c in report.per_class else "-" for c in classes
        ]
        lines.append(name.ljust(width) + "".join(cell.rjust(col) for cell in cells))
    return "\n".join(lines)
