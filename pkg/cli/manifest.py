"""
Manifest CSV: header `path,speaker_id,utterance_id,emotion,sentence_id,split`.
`path` is an audio file, or any reference for the `file` backend. `sentence_id` and
`split` may be empty. Relative paths are resolved against the manifest's directory.
"""

import csv
import logging
from collections.abc import Sequence
from pathlib import Path

from core.exceptions import EmptyManifestError, ManifestError, UnknownLabelError
from embeddings.models import ManifestEntry
from emotions.models import EmotionLabel

logger = logging.getLogger(__name__)

MANIFEST_COLUMNS = ("path", "speaker_id", "utterance_id", "emotion", "sentence_id", "split")
REQUIRED_COLUMNS = ("path", "speaker_id", "utterance_id", "emotion")
SPLIT_TAGS = ("train", "test")


def is_manifest(path: str | Path) -> bool:
    """True for a CSV whose header has a `path` column."""
    path = Path(path)
    if path.suffix.lower() != ".csv":
        return False
    with path.open(newline="", encoding="utf-8") as handle:
        header = next(csv.reader(handle), [])
    return "path" in header


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    """
    Parses and validates a manifest.

    :raises EmptyManifestError: No data rows.
    :raises ManifestError: Missing columns, unknown emotion or split tag, duplicate utterance id.
    """
    path = Path(path)
    base = path.parent
    entries: list[ManifestEntry] = []
    seen: set[str] = set()

    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        missing = [c for c in REQUIRED_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ManifestError(f"{path} lacks columns: {', '.join(missing)}")

        for line, record in enumerate(reader, start=2):
            utterance_id = record["utterance_id"].strip()
            if not utterance_id:
                raise ManifestError(f"{path}:{line}: empty utterance_id")
            if utterance_id in seen:
                raise ManifestError(f"{path}:{line}: duplicate utterance_id '{utterance_id}'")
            seen.add(utterance_id)

            try:
                emotion = EmotionLabel.parse(record["emotion"])
            except UnknownLabelError as e:
                raise ManifestError(f"{path}:{line}: {e}") from e

            split = (record.get("split") or "").strip().lower() or None
            if split is not None and split not in SPLIT_TAGS:
                raise ManifestError(f"{path}:{line}: split must be train or test, got '{split}'")

            audio = Path(record["path"].strip())
            if not audio.is_absolute():
                audio = base / audio

            entries.append(
                ManifestEntry(
                    path=str(audio),
                    speaker_id=record["speaker_id"].strip(),
                    utterance_id=utterance_id,
                    emotion=emotion.value,
                    sentence_id=(record.get("sentence_id") or "").strip() or None,
                    split=split,
                )
            )

    if not entries:
        raise EmptyManifestError(f"{path} has no rows")
    logger.info("Read %d manifest rows from %s", len(entries), path)
    return entries


def write_manifest(entries: Sequence[ManifestEntry], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(MANIFEST_COLUMNS)
        for e in entries:
            writer.writerow(
                [e.path, e.speaker_id, e.utterance_id, e.emotion, e.sentence_id or "", e.split or ""]
            )
    return path
