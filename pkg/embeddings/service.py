import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from audio.models import AudioClip
from core.exceptions import DimMismatchError, EmptyInputError, PipelineError, TooShortError
from embeddings.interfaces import AbstractEmbeddingBackend, AbstractUtteranceEmbedder
from embeddings.models import EmbedderConfig, Embedding, ManifestEntry, SkipRecord
from emotions.models import EmotionLabel, LabeledEmbedding

logger = logging.getLogger(__name__)

TOO_SHORT = "TooShort"


def frame_count(n_samples: int, frame_len: int, hop: int) -> int:
    """floor((N - frame_len) / hop) + 1 for N >= frame_len, else 0."""
    if n_samples < frame_len:
        return 0
    return (n_samples - frame_len) // hop + 1


def frame_utterance(samples: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    """
    Cuts a signal into overlapping analysis frames starting at 0, hop, 2*hop, ...

    :param samples: 1-D signal at the nominal rate.
    :return: Read-only (n_frames, frame_len) view of the signal.
    :raises TooShortError: When the signal is shorter than one frame.
    """
    samples = np.asarray(samples)
    if samples.shape[0] < frame_len:
        raise TooShortError(samples.shape[0], frame_len)

    windows = np.lib.stride_tricks.sliding_window_view(samples, frame_len)
    return windows[::hop]


def average_embedding(embeddings: Sequence[Embedding]) -> Embedding:
    """
    Component-wise arithmetic mean of a non-empty list of equal-dimension vectors.

    :raises EmptyInputError: No vectors given.
    :raises DimMismatchError: Vectors differ in length.
    """
    if len(embeddings) == 0:
        raise EmptyInputError("cannot average an empty list of embeddings")

    dim = len(embeddings[0])
    for e in embeddings:
        if len(e) != dim:
            raise DimMismatchError(dim, len(e))

    return np.mean(np.vstack(embeddings).astype(np.float64), axis=0)


def extract_utterance_embedding(
    clip: AudioClip, config: EmbedderConfig, backend: AbstractEmbeddingBackend
) -> Embedding:
    """
    Frames the clip, embeds every frame with the backend and averages the frame
    embeddings into one utterance embedding.

    :raises TooShortError: The clip does not fill one frame; the utterance is discarded.
    """
    frames = frame_utterance(clip.samples, config.frame_len, config.hop)
    logger.debug("Embedding %d frames of %s", frames.shape[0], clip.source_path)
    return average_embedding([backend.embed_frame(frame) for frame in frames])


@dataclass
class ExtractionResult:
    """Embeddings of the surviving utterances, in manifest order, plus the skip report."""

    rows: list[LabeledEmbedding] = field(default_factory=list)
    skipped: list[SkipRecord] = field(default_factory=list)

    @property
    def n_discarded(self) -> int:
        """Utterances dropped by the one-frame minimum length rule."""
        return sum(1 for s in self.skipped if s.reason == TOO_SHORT)


def _skip_reason(exc: Exception) -> str:
    if isinstance(exc, TooShortError):
        return TOO_SHORT
    if isinstance(exc, PipelineError):
        return type(exc).__name__.removesuffix("Error")
    return "Unreadable"


def _embed_entry(
    embedder: AbstractUtteranceEmbedder, entry: ManifestEntry
) -> tuple[Embedding | None, SkipRecord | None]:
    try:
        return embedder.embed_entry(entry), None
    except (PipelineError, OSError) as e:
        return None, SkipRecord(entry.utterance_id, entry.path, _skip_reason(e), str(e))


class EmbeddingService:
    """
    Batch extraction of utterance embeddings from a manifest.
    Per-utterance work runs through joblib; results are merged in manifest order.
    """

    def __init__(self, embedder: AbstractUtteranceEmbedder, n_jobs: int = 1):
        self.embedder = embedder
        self.n_jobs = n_jobs

    def extract(self, entries: Sequence[ManifestEntry]) -> ExtractionResult:
        """
        Embeds every manifest entry. Entries that fail (too short, unreadable,
        malformed) are listed in the skip report instead of failing the batch.

        :param entries: Manifest rows.
        :return: ExtractionResult with rows in manifest order.
        """
        logger.info("Extracting embeddings for %d utterances (n_jobs=%d).", len(entries), self.n_jobs)

        outcomes = Parallel(n_jobs=self.n_jobs)(
            delayed(_embed_entry)(self.embedder, entry) for entry in entries
        )

        result = ExtractionResult()
        for entry, (embedding, skip) in zip(entries, outcomes, strict=True):
            if skip is not None:
                logger.warning(
                    "Discarded utterance %s (%s): %s", skip.utterance_id, skip.reason, skip.detail
                )
                result.skipped.append(skip)
                continue

            result.rows.append(
                LabeledEmbedding(
                    embedding=embedding,
                    speaker_id=entry.speaker_id,
                    utterance_id=entry.utterance_id,
                    emotion=EmotionLabel.parse(entry.emotion),
                    sentence_id=entry.sentence_id,
                    split=entry.split,
                )
            )

        logger.info(
            "Extraction finished: %d embeddings, %d skipped (%d too short).",
            len(result.rows),
            len(result.skipped),
            result.n_discarded,
        )
        return result
