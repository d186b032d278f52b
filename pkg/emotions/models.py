from dataclasses import dataclass, field
from enum import StrEnum
from typing import TYPE_CHECKING

import numpy as np

from core.exceptions import UnknownLabelError

if TYPE_CHECKING:
    from svm.models import BinarySvmModel, MulticlassSvmModel


class EmotionLabel(StrEnum):
    """
    Categorical emotion. Declaration order fixes the serialization codes 0-5.
    """

    ANGRY = "Angry"
    SAD = "Sad"
    HAPPY = "Happy"
    NEUTRAL = "Neutral"
    FEAR = "Fear"
    DISGUST = "Disgust"

    @property
    def code(self) -> int:
        return _CODES[self]

    @property
    def abbreviation(self) -> str:
        return _ABBREVIATIONS[self]

    @classmethod
    def from_code(cls, code: int) -> "EmotionLabel":
        try:
            return _BY_CODE[code]
        except KeyError:
            raise UnknownLabelError(f"unknown emotion code {code}") from None

    @classmethod
    def parse(cls, text: str) -> "EmotionLabel":
        """Accepts full names or the three-letter corpus abbreviations, any case."""
        key = text.strip().lower()
        for label in cls:
            if key in (label.value.lower(), label.abbreviation.lower()):
                return label
        raise UnknownLabelError(f"unknown emotion '{text}'")


_CODES = {label: code for code, label in enumerate(EmotionLabel)}
_BY_CODE = {code: label for label, code in _CODES.items()}
_ABBREVIATIONS = {
    EmotionLabel.ANGRY: "ANG",
    EmotionLabel.SAD: "SAD",
    EmotionLabel.HAPPY: "HAP",
    EmotionLabel.NEUTRAL: "NEU",
    EmotionLabel.FEAR: "FEA",
    EmotionLabel.DISGUST: "DIS",
}

SIX_CLASS: tuple[EmotionLabel, ...] = tuple(EmotionLabel)
FOUR_CLASS: tuple[EmotionLabel, ...] = (
    EmotionLabel.ANGRY,
    EmotionLabel.SAD,
    EmotionLabel.HAPPY,
    EmotionLabel.NEUTRAL,
)


class DetectionLabel(StrEnum):
    """Outcome of the emotion detection task."""

    NEUTRAL = "Neutral"
    EMOTION_PRESENT = "EmotionPresent"


DETECTION_CLASSES: tuple[DetectionLabel, ...] = (
    DetectionLabel.NEUTRAL,
    DetectionLabel.EMOTION_PRESENT,
)


def to_detection_label(emotion: EmotionLabel) -> DetectionLabel:
    return DetectionLabel.NEUTRAL if emotion == EmotionLabel.NEUTRAL else DetectionLabel.EMOTION_PRESENT


class ClassifierHead(StrEnum):
    FLAT = "flat"
    HIERARCHICAL = "hierarchical"
    DETECTOR = "detector"


@dataclass(frozen=True, eq=False)
class LabeledEmbedding:
    """
    One dataset row: an utterance embedding with its speaker, utterance and emotion.

    Attributes:
        embedding (np.ndarray): Utterance embedding, float64.
        speaker_id (str): Speaker identifier.
        utterance_id (str): Unique within a dataset.
        emotion (EmotionLabel): Emotion the utterance was spoken with.
        sentence_id (str | None): Text identifier, needed by the match-score experiment.
        split (str | None): Optional `train` / `test` tag carried from the manifest.
    """

    embedding: np.ndarray
    speaker_id: str
    utterance_id: str
    emotion: EmotionLabel
    sentence_id: str | None = None
    split: str | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "embedding", np.asarray(self.embedding, dtype=np.float64))

    @property
    def dim(self) -> int:
        return int(self.embedding.shape[0])

    def __repr__(self) -> str:
        return (
            f"LabeledEmbedding(utterance_id='{self.utterance_id}', speaker_id='{self.speaker_id}', "
            f"emotion={self.emotion.value}, sentence_id={self.sentence_id!r}, dim={self.dim})"
        )


@dataclass(frozen=True)
class HierarchicalClassifier:
    """
    Two-stage classifier: stage 1 separates `first_class` from the rest, stage 2
    classifies everything else into the remaining three classes.
    """

    first_class: EmotionLabel
    stage1: "BinarySvmModel"
    stage2: "MulticlassSvmModel"

    @property
    def remaining_classes(self) -> tuple[EmotionLabel, ...]:
        return tuple(c for c in FOUR_CLASS if c != self.first_class)
