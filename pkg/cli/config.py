"""
Pipeline configuration: a flat JSON object whose keys mirror `PipelineConfig`.
Precedence is command-line flag, then config file, then built-in default.
"""

import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from core.config import settings
from core.exceptions import ConfigError, UnknownLabelError
from core.provenance import config_hash
from embeddings.models import (
    DEFAULT_DIM,
    DEFAULT_FRAME_LEN,
    DEFAULT_HOP,
    SPECTRAL_BASELINE,
    EmbedderConfig,
)
from emotions.models import SIX_CLASS, EmotionLabel
from evaluation.models import SplitSpec
from matchscore.service import DEFAULT_IMPOSTOR_CAP
from svm.models import TrainParams
from synthlab.models import DEFAULT_SENTENCES, SynthConfig

logger = logging.getLogger(__name__)


# Settings that never change what a command writes
UNHASHED_KEYS = frozenset({"n_jobs"})


@dataclass(frozen=True)
class PipelineConfig:
    """
    Resolved settings of one pipeline run. Defaults are the published constants:
    C=1000, gamma=0.1, 22000-sample frames with a 220-sample hop, 256-d embeddings.
    """

    frame_len: int = DEFAULT_FRAME_LEN
    hop: int = DEFAULT_HOP
    dim: int = DEFAULT_DIM
    backend: str = SPECTRAL_BASELINE
    embedding_source: str = ""
    seed: int = 0
    C: float = 1000.0
    gamma: float = 0.1
    kkt_tol: float = 1e-3
    max_passes: int = 10
    max_iter: int | None = None
    train_fraction: float = 0.8
    speaker_disjoint: bool = True
    first_class: str = EmotionLabel.SAD.value
    n_jobs: int = field(default_factory=lambda: settings.N_JOBS)
    impostor_cap: int = DEFAULT_IMPOSTOR_CAP
    synth_n_speakers: int = 10
    synth_utterances_per_cell: int = 5
    synth_dim: int = DEFAULT_DIM
    synth_emotions: tuple[str, ...] = tuple(e.value for e in SIX_CLASS)
    synth_speaker_scale: float = 1.0
    synth_emotion_offset_scale: float = 0.6
    synth_noise_scale: float = 0.2
    synth_emotion_scales: dict[str, float] = field(default_factory=dict)
    synth_sentences: tuple[str, ...] = DEFAULT_SENTENCES

    def __post_init__(self):
        try:
            object.__setattr__(self, "first_class", EmotionLabel.parse(self.first_class).value)
            object.__setattr__(
                self,
                "synth_emotions",
                tuple(EmotionLabel.parse(e).value for e in self.synth_emotions),
            )
            object.__setattr__(
                self,
                "synth_emotion_scales",
                {
                    EmotionLabel.parse(k).value: float(v)
                    for k, v in self.synth_emotion_scales.items()
                },
            )
        except UnknownLabelError as e:
            raise ConfigError(str(e)) from e
        object.__setattr__(self, "synth_sentences", tuple(self.synth_sentences))
        if self.impostor_cap < 1:
            raise ConfigError(f"impostor_cap must be positive, got {self.impostor_cap}")
        if self.n_jobs == 0:
            raise ConfigError("n_jobs must be non-zero")

        # Derived configs validate their own fields
        self.embedder_config()
        self.train_params()
        self.split_spec()
        self.synth_config()

    @property
    def first_class_label(self) -> EmotionLabel:
        return EmotionLabel(self.first_class)

    def embedder_config(self) -> EmbedderConfig:
        return EmbedderConfig(
            frame_len=self.frame_len,
            hop=self.hop,
            dim=self.dim,
            backend=self.backend,
            seed=self.seed,
            embedding_source=self.embedding_source,
        )

    def train_params(self) -> TrainParams:
        return TrainParams(
            C=self.C,
            gamma=self.gamma,
            kkt_tol=self.kkt_tol,
            max_passes=self.max_passes,
            max_iter=self.max_iter,
            seed=self.seed,
        )

    def split_spec(self) -> SplitSpec:
        return SplitSpec(
            train_fraction=self.train_fraction,
            seed=self.seed,
            speaker_disjoint=self.speaker_disjoint,
        )

    def synth_config(self) -> SynthConfig:
        return SynthConfig(
            n_speakers=self.synth_n_speakers,
            utterances_per_cell=self.synth_utterances_per_cell,
            dim=self.synth_dim,
            emotions=tuple(EmotionLabel(e) for e in self.synth_emotions),
            speaker_scale=self.synth_speaker_scale,
            emotion_offset_scale=self.synth_emotion_offset_scale,
            noise_scale=self.synth_noise_scale,
            seed=self.seed,
            emotion_scales={EmotionLabel(k): v for k, v in self.synth_emotion_scales.items()},
            sentences=self.synth_sentences,
        )

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["synth_emotions"] = list(self.synth_emotions)
        data["synth_sentences"] = list(self.synth_sentences)
        return data

    @property
    def config_hash(self) -> str:
        """Hash of every setting that can change an output; parallelism is left out."""
        return config_hash({k: v for k, v in self.to_dict().items() if k not in UNHASHED_KEYS})


CONFIG_KEYS = frozenset(f.name for f in fields(PipelineConfig))


def read_config_file(path: str | Path) -> dict[str, Any]:
    """
    Reads a JSON config file.

    :raises ConfigError: Unreadable file, not a JSON object, or unknown keys.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys in {path}: {', '.join(unknown)}")
    return data


def load_pipeline_config(
    path: str | Path | None = None, overrides: dict[str, Any] | None = None
) -> PipelineConfig:
    """
    Resolves the pipeline configuration.

    :param path: Config file; falls back to the `SER_CONFIG` setting, none when empty.
    :param overrides: Command-line values; None entries are ignored.
    :raises ConfigError: Unknown keys or invalid values.
    """
    values: dict[str, Any] = {}
    path = path or settings.SER_CONFIG
    if path:
        values.update(read_config_file(path))
        logger.debug("Loaded pipeline config from %s", path)

    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    unknown = sorted(set(overrides) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    values.update(overrides)

    try:
        return PipelineConfig(**values)
    except TypeError as e:
        raise ConfigError(f"invalid configuration: {e}") from e
