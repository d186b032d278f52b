"""
Embedding files.

EMB1 (little-endian): magic "EMB1", u32 dim, u32 row count, then per row
u16-length-prefixed UTF-8 speaker id, u16-prefixed utterance id, u8 emotion code,
u16-prefixed sentence id (empty when absent) and `dim` float32 values.

CSV: header `speaker_id,utterance_id,emotion,sentence_id[,split],v0..v{dim-1}`.
"""

import csv
import logging
import struct
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from core.exceptions import (
    BadMagicError,
    DimMismatchError,
    InvalidEmbeddingsError,
    TruncatedFileError,
)
from emotions.models import EmotionLabel, LabeledEmbedding

logger = logging.getLogger(__name__)

EMB1_MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sII")
_U16 = struct.Struct("<H")
_U8 = struct.Struct("<B")

META_COLUMNS = ("speaker_id", "utterance_id", "emotion", "sentence_id")


def _common_dim(rows: Sequence[LabeledEmbedding], dim: int | None) -> int:
    if not rows:
        return dim or 0
    expected = dim if dim is not None else rows[0].dim
    for row in rows:
        if row.dim != expected:
            raise DimMismatchError(expected, row.dim)
    return expected


def _check_rows(rows: Sequence[LabeledEmbedding], source: Path) -> None:
    seen: set[str] = set()
    for row in rows:
        if row.utterance_id in seen:
            raise InvalidEmbeddingsError(f"duplicate utterance id '{row.utterance_id}' in {source}")
        seen.add(row.utterance_id)
        if not np.all(np.isfinite(row.embedding)):
            raise InvalidEmbeddingsError(
                f"non-finite embedding for utterance '{row.utterance_id}' in {source}"
            )


def _pack_text(text: str | None) -> bytes:
    raw = (text or "").encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValueError(f"identifier longer than 65535 bytes: {text[:32]}...")
    return _U16.pack(len(raw)) + raw


def encode_emb1(rows: Sequence[LabeledEmbedding], dim: int | None = None) -> bytes:
    dim = _common_dim(rows, dim)
    parts = [_HEADER.pack(EMB1_MAGIC, dim, len(rows))]
    for row in rows:
        parts.append(_pack_text(row.speaker_id))
        parts.append(_pack_text(row.utterance_id))
        parts.append(_U8.pack(row.emotion.code))
        parts.append(_pack_text(row.sentence_id))
        parts.append(row.embedding.astype("<f4").tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, payload: bytes):
        self.payload = payload
        self.offset = 0

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.payload):
            raise TruncatedFileError(
                f"needed {n} bytes at offset {self.offset}, file has {len(self.payload)}"
            )
        chunk = self.payload[self.offset : self.offset + n]
        self.offset += n
        return chunk

    def text(self) -> str:
        (length,) = _U16.unpack(self.take(_U16.size))
        return self.take(length).decode("utf-8")


def decode_emb1(payload: bytes) -> list[LabeledEmbedding]:
    if len(payload) < 4 or payload[:4] != EMB1_MAGIC:
        raise BadMagicError(f"expected magic {EMB1_MAGIC!r}, found {payload[:4]!r}")
    reader = _Reader(payload)
    _, dim, count = _HEADER.unpack(reader.take(_HEADER.size))

    rows = []
    for _ in range(count):
        speaker_id = reader.text()
        utterance_id = reader.text()
        (code,) = _U8.unpack(reader.take(_U8.size))
        sentence_id = reader.text() or None
        vector = np.frombuffer(reader.take(4 * dim), dtype="<f4").astype(np.float64)
        rows.append(
            LabeledEmbedding(
                embedding=vector,
                speaker_id=speaker_id,
                utterance_id=utterance_id,
                emotion=EmotionLabel.from_code(code),
                sentence_id=sentence_id,
            )
        )
    return rows


def save_embeddings(rows: Sequence[LabeledEmbedding], path: str | Path, dim: int | None = None) -> int:
    """
    Writes rows to an EMB1 file.

    :param dim: Dimension recorded when `rows` is empty.
    :return: Number of rows written.
    :raises DimMismatchError: Rows of different dimensions.
    """
    path = Path(path)
    path.write_bytes(encode_emb1(rows, dim))
    logger.info("Saved %d embeddings to %s", len(rows), path)
    return len(rows)


def load_embeddings(path: str | Path) -> list[LabeledEmbedding]:
    """
    Reads an EMB1 file, or a CSV export when the suffix is `.csv`.

    :raises BadMagicError: The file is not EMB1.
    :raises TruncatedFileError: Fewer bytes than the header promises.
    :raises InvalidEmbeddingsError: Repeated utterance ids or non-finite values.
    """
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return load_embeddings_csv(path)
    rows = decode_emb1(path.read_bytes())
    _check_rows(rows, path)
    logger.info("Loaded %d embeddings from %s", len(rows), path)
    return rows


def save_embeddings_csv(rows: Sequence[LabeledEmbedding], path: str | Path) -> int:
    """Writes the CSV export; a `split` column is added when any row carries a split tag."""
    path = Path(path)
    dim = _common_dim(rows, None)
    with_split = any(row.split for row in rows)

    header = list(META_COLUMNS)
    if with_split:
        header.append("split")
    header += [f"v{i}" for i in range(dim)]

    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            meta = [row.speaker_id, row.utterance_id, row.emotion.value, row.sentence_id or ""]
            if with_split:
                meta.append(row.split or "")
            writer.writerow(meta + [repr(float(v)) for v in row.embedding])

    logger.info("Exported %d embeddings to %s", len(rows), path)
    return len(rows)


def load_embeddings_csv(path: str | Path) -> list[LabeledEmbedding]:
    path = Path(path)
    rows: list[LabeledEmbedding] = []
    with path.open(newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        vector_columns = [c for c in reader.fieldnames or [] if c.startswith("v") and c[1:].isdigit()]
        vector_columns.sort(key=lambda c: int(c[1:]))
        for record in reader:
            try:
                vector = np.array([float(record[c]) for c in vector_columns], dtype=np.float64)
            except (TypeError, ValueError) as e:
                raise InvalidEmbeddingsError(
                    f"bad vector value for utterance '{record.get('utterance_id')}' in {path}"
                ) from e
            if rows and vector.shape[0] != rows[0].dim:
                raise DimMismatchError(rows[0].dim, vector.shape[0])
            rows.append(
                LabeledEmbedding(
                    embedding=vector,
                    speaker_id=record["speaker_id"],
                    utterance_id=record["utterance_id"],
                    emotion=EmotionLabel.parse(record["emotion"]),
                    sentence_id=record.get("sentence_id") or None,
                    split=record.get("split") or None,
                )
            )
    _check_rows(rows, path)
    logger.info("Loaded %d embeddings from %s", len(rows), path)
    return rows
