from dataclasses import asdict, dataclass

import numpy as np
import numpy.typing as npt

from core.exceptions import ConfigError

# Fixed-dimension real vector for one frame or one utterance
Embedding = npt.NDArray[np.float64]

DEFAULT_FRAME_LEN = 22000
DEFAULT_HOP = 220
DEFAULT_DIM = 256

SPECTRAL_BASELINE = "spectral-baseline"
PRECOMPUTED = "file"


@dataclass(frozen=True)
class EmbedderConfig:
    """
    Framing and backend settings of the extraction stage.

    Attributes:
        frame_len (int): Samples per analysis frame, about one second at the nominal rate.
        hop (int): Samples between frame starts, about 10 ms.
        dim (int): Embedding dimension.
        backend (str): `spectral-baseline` or `file`.
        seed (int): Seed of deterministic backends.
        embedding_source (str): File read by the `file` backend.
    """

    frame_len: int = DEFAULT_FRAME_LEN
    hop: int = DEFAULT_HOP
    dim: int = DEFAULT_DIM
    backend: str = SPECTRAL_BASELINE
    seed: int = 0
    embedding_source: str = ""

    def __post_init__(self):
        if self.frame_len <= 0:
            raise ConfigError(f"frame_len must be positive, got {self.frame_len}")
        if not 0 < self.hop <= self.frame_len:
            raise ConfigError(f"hop must lie in (0, frame_len], got {self.hop}")
        if self.dim <= 0:
            raise ConfigError(f"dim must be positive, got {self.dim}")
        if self.seed < 0:
            raise ConfigError(f"seed must be unsigned, got {self.seed}")
        if self.backend not in (SPECTRAL_BASELINE, PRECOMPUTED):
            raise ConfigError(f"unknown embedding backend '{self.backend}'")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SkipRecord:
    """An utterance left out of the extracted set, with the reason."""

    utterance_id: str
    path: str
    reason: str
    detail: str = ""


@dataclass(frozen=True)
class ManifestEntry:
    """
    One manifest row: where the utterance lives and how it is labelled.
    """

    path: str
    speaker_id: str
    utterance_id: str
    emotion: str
    sentence_id: str | None = None
    split: str | None = None
