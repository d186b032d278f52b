from dataclasses import dataclass, field

from core.exceptions import ConfigError
from emotions.models import SIX_CLASS, EmotionLabel

# Sentence codes of the acted-emotion corpus the experiments mirror
DEFAULT_SENTENCES: tuple[str, ...] = (
    "IEO",
    "TIE",
    "IOM",
    "IWW",
    "TAI",
    "MTI",
    "IWL",
    "ITH",
    "DFA",
    "ITS",
    "TSI",
    "WSI",
)


@dataclass(frozen=True)
class SynthConfig:
    """
    Shape of a synthetic corpus. Scales are expected vector norms: a component of an
    offset or noise vector has standard deviation `scale / sqrt(dim)`.

    Attributes:
        n_speakers (int): Number of speakers.
        utterances_per_cell (int): Utterances per (speaker, emotion) cell.
        dim (int): Embedding dimension.
        emotions (tuple[EmotionLabel, ...]): Emotions spoken by every speaker.
        speaker_scale (float): Spread of the speaker centroids before normalisation.
        emotion_offset_scale (float): Norm of the emotion offsets shared by all speakers.
        noise_scale (float): Norm of the per-utterance noise.
        seed (int): Root seed; per-speaker seeds are derived from it.
        emotion_scales (dict[EmotionLabel, float]): Per-emotion offset multipliers.
        sentences (tuple[str, ...]): Sentence ids, cycled over the utterances of a cell.
    """

    n_speakers: int = 10
    utterances_per_cell: int = 5
    dim: int = 256
    emotions: tuple[EmotionLabel, ...] = SIX_CLASS
    speaker_scale: float = 1.0
    emotion_offset_scale: float = 0.6
    noise_scale: float = 0.2
    seed: int = 0
    emotion_scales: dict[EmotionLabel, float] = field(default_factory=dict)
    sentences: tuple[str, ...] = DEFAULT_SENTENCES

    def __post_init__(self):
        if self.n_speakers < 1:
            raise ConfigError(f"n_speakers must be at least 1, got {self.n_speakers}")
        if self.utterances_per_cell < 1:
            raise ConfigError(
                f"utterances_per_cell must be at least 1, got {self.utterances_per_cell}"
            )
        if self.dim <= 0:
            raise ConfigError(f"dim must be positive, got {self.dim}")
        if not self.emotions:
            raise ConfigError("at least one emotion is required")
        if not self.sentences:
            raise ConfigError("at least one sentence id is required")
        if self.seed < 0:
            raise ConfigError(f"seed must be unsigned, got {self.seed}")
        for name in ("speaker_scale", "emotion_offset_scale", "noise_scale"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative, got {getattr(self, name)}")
        if any(scale < 0 for scale in self.emotion_scales.values()):
            raise ConfigError("emotion_scales must be non-negative")
        object.__setattr__(self, "emotions", tuple(EmotionLabel(e) for e in self.emotions))
        object.__setattr__(
            self,
            "emotion_scales",
            {EmotionLabel(k): float(v) for k, v in self.emotion_scales.items()},
        )

    def emotion_scale(self, emotion: EmotionLabel) -> float:
        return self.emotion_scales.get(emotion, 1.0)

    @property
    def n_rows(self) -> int:
        return self.n_speakers * len(self.emotions) * self.utterances_per_cell

    def to_dict(self) -> dict:
        return {
            "n_speakers": self.n_speakers,
            "utterances_per_cell": self.utterances_per_cell,
            "dim": self.dim,
            "emotions": [e.value for e in self.emotions],
            "speaker_scale": self.speaker_scale,
            "emotion_offset_scale": self.emotion_offset_scale,
            "noise_scale": self.noise_scale,
            "seed": self.seed,
            "emotion_scales": {e.value: s for e, s in sorted(self.emotion_scales.items())},
            "sentences": list(self.sentences),
        }
