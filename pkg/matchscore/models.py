from dataclasses import asdict, dataclass, field
from enum import StrEnum

import numpy as np

from core.exceptions import UnknownLabelError
from emotions.models import EmotionLabel


class PairingCategory(StrEnum):
    INTER_EMOTION = "InterEmotion"
    GENUINE_NEUTRAL = "GenuineNeutral"
    IMPOSTOR_NEUTRAL = "ImpostorNeutral"


@dataclass(frozen=True)
class PairingKind:
    """
    A group of match scores. Inter-emotion kinds are unordered: the two emotions are
    stored in label-code order, so (Sad, Angry) and (Angry, Sad) are the same kind.
    """

    category: PairingCategory
    first: EmotionLabel | None = None
    second: EmotionLabel | None = None

    def __post_init__(self):
        if self.category == PairingCategory.INTER_EMOTION:
            if self.first is None or self.second is None or self.first == self.second:
                raise ValueError("an inter-emotion pairing needs two distinct emotions")
            if self.first.code > self.second.code:
                first, second = self.second, self.first
                object.__setattr__(self, "first", first)
                object.__setattr__(self, "second", second)
        elif self.first is not None or self.second is not None:
            raise ValueError(f"{self.category} pairings carry no emotions")

    @classmethod
    def inter(cls, e1: EmotionLabel, e2: EmotionLabel) -> "PairingKind":
        return cls(PairingCategory.INTER_EMOTION, e1, e2)

    @classmethod
    def genuine(cls) -> "PairingKind":
        return cls(PairingCategory.GENUINE_NEUTRAL)

    @classmethod
    def impostor(cls) -> "PairingKind":
        return cls(PairingCategory.IMPOSTOR_NEUTRAL)

    @property
    def label(self) -> str:
        """`ANG-SAD` style for inter-emotion kinds, the category name otherwise."""
        if self.category == PairingCategory.INTER_EMOTION:
            return f"{self.first.abbreviation}-{self.second.abbreviation}"
        return self.category.value

    @classmethod
    def parse(cls, label: str) -> "PairingKind":
        for category in (PairingCategory.GENUINE_NEUTRAL, PairingCategory.IMPOSTOR_NEUTRAL):
            if label == category.value:
                return cls(category)
        parts = label.split("-")
        if len(parts) != 2:
            raise UnknownLabelError(f"unknown pairing kind '{label}'")
        return cls.inter(EmotionLabel.parse(parts[0]), EmotionLabel.parse(parts[1]))

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class BoxStats:
    """
    Box-plot summary of one score distribution. Whiskers reach the most extreme
    scores within 1.5 IQR of the quartiles; `n_outliers` counts the scores beyond.
    """

    n: int
    min: float
    q1: float
    median: float
    q3: float
    max: float
    whisker_low: float
    whisker_high: float
    n_outliers: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ScoreRecord:
    """One cosine match score; impostor records name both speakers as `a|b`."""

    kind: PairingKind
    speaker_id: str
    score: float


@dataclass
class MatchScoreResult:
    """
    Attributes:
        kinds (list[PairingKind]): Every kind enumerated, in report order.
        records (dict[PairingKind, list[ScoreRecord]]): Scores per kind.
        missing (list[PairingKind]): Kinds for which no eligible pair existed.
    """

    kinds: list[PairingKind]
    records: dict[PairingKind, list[ScoreRecord]] = field(default_factory=dict)
    missing: list[PairingKind] = field(default_factory=list)

    def scores(self, kind: PairingKind) -> np.ndarray:
        return np.array([r.score for r in self.records.get(kind, [])], dtype=np.float64)

    def all_records(self) -> list[ScoreRecord]:
        return [record for kind in self.kinds for record in self.records.get(kind, [])]
