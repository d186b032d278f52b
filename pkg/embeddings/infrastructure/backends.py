import logging

import librosa
import numpy as np

from audio.models import NOMINAL_SAMPLE_RATE
from audio.service import load_clip
from core.exceptions import ConfigError, DimMismatchError, ManifestError
from embeddings.infrastructure.storage import load_embeddings
from embeddings.interfaces import AbstractEmbeddingBackend, AbstractUtteranceEmbedder
from embeddings.models import (
    PRECOMPUTED,
    SPECTRAL_BASELINE,
    EmbedderConfig,
    Embedding,
    ManifestEntry,
)
from embeddings.service import extract_utterance_embedding

logger = logging.getLogger(__name__)

STFT_WINDOW = 512
STFT_HOP = 256
N_MELS = 40
LOG_FLOOR = 1e-10


class SpectralBaselineBackend(AbstractEmbeddingBackend):
    """
    Deterministic stand-in for a speaker encoder.

    Log-mel statistics of the frame (40 bands, mean and standard deviation over time)
    are projected to `dim` by a fixed Gaussian matrix drawn from the configured seed,
    then L2-normalized.
    """

    name = SPECTRAL_BASELINE

    def __init__(self, config: EmbedderConfig, sample_rate: int = NOMINAL_SAMPLE_RATE):
        self.config = config
        self.sample_rate = sample_rate
        self._mel_basis = librosa.filters.mel(
            sr=sample_rate,
            n_fft=STFT_WINDOW,
            n_mels=N_MELS,
            fmin=0.0,
            fmax=sample_rate / 2.0,
        ).astype(np.float64)
        rng = np.random.default_rng(config.seed)
        self._projection = rng.standard_normal((config.dim, 2 * N_MELS))

    @property
    def dim(self) -> int:
        return self.config.dim

    def log_mel_statistics(self, frame: np.ndarray) -> np.ndarray:
        """Per-band mean and standard deviation of log mel energies, an 80-vector."""
        spectrum = librosa.stft(
            np.asarray(frame, dtype=np.float64),
            n_fft=STFT_WINDOW,
            hop_length=STFT_HOP,
            window="hann",
            center=False,
        )
        energies = self._mel_basis @ (np.abs(spectrum) ** 2)
        log_mel = np.log(energies + LOG_FLOOR)
        return np.concatenate([log_mel.mean(axis=1), log_mel.std(axis=1)])

    def embed_frame(self, frame: np.ndarray) -> Embedding:
        if frame.shape[0] != self.config.frame_len:
            raise ValueError(f"frame has {frame.shape[0]} samples, expected {self.config.frame_len}")
        vector = self._projection @ self.log_mel_statistics(frame)
        norm = np.linalg.norm(vector)
        return vector / norm if norm > 0 else vector


class FramedAudioEmbedder(AbstractUtteranceEmbedder):
    """Reads the entry's WAV file, resamples it and averages the backend's frame embeddings."""

    def __init__(
        self,
        backend: AbstractEmbeddingBackend,
        config: EmbedderConfig,
        sample_rate: int = NOMINAL_SAMPLE_RATE,
    ):
        self.backend = backend
        self.config = config
        self.sample_rate = sample_rate

    @property
    def dim(self) -> int:
        return self.backend.dim

    def embed_entry(self, entry: ManifestEntry) -> Embedding:
        clip = load_clip(entry.path, self.sample_rate)
        return extract_utterance_embedding(clip, self.config, self.backend)


class PrecomputedEmbedder(AbstractUtteranceEmbedder):
    """
    Looks embeddings up by utterance id in an EMB1 or CSV file, e.g. exports of a
    real speaker encoder.
    """

    def __init__(self, source: str, expected_dim: int | None = None):
        self.source = source
        self._table = {row.utterance_id: row.embedding for row in load_embeddings(source)}
        self._dim = next(iter(self._table.values())).shape[0] if self._table else (expected_dim or 0)
        if expected_dim is not None and self._table and self._dim != expected_dim:
            raise DimMismatchError(expected_dim, self._dim)
        logger.info("Loaded %d precomputed embeddings from %s", len(self._table), source)

    @property
    def dim(self) -> int:
        return self._dim

    def embed_entry(self, entry: ManifestEntry) -> Embedding:
        try:
            return self._table[entry.utterance_id]
        except KeyError:
            raise ManifestError(
                f"no precomputed embedding for utterance '{entry.utterance_id}' in {self.source}"
            ) from None


def build_embedder(
    config: EmbedderConfig, sample_rate: int = NOMINAL_SAMPLE_RATE
) -> AbstractUtteranceEmbedder:
    """
    Chooses the utterance embedder for the configured backend name.

    :raises ConfigError: `file` backend without an `embedding_source`.
    """
    if config.backend == PRECOMPUTED:
        if not config.embedding_source:
            raise ConfigError("the 'file' backend needs embedding_source")
        return PrecomputedEmbedder(config.embedding_source, expected_dim=config.dim)

    return FramedAudioEmbedder(SpectralBaselineBackend(config, sample_rate), config, sample_rate)
