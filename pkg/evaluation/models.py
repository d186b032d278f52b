from collections.abc import Hashable
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from core.exceptions import ConfigError, EmptyEvalError


@dataclass(frozen=True)
class SplitSpec:
    """
    Train/test partition settings.

    Attributes:
        train_fraction (float): Target share of utterances on the train side, in (0, 1).
        seed (int): Seeds the speaker shuffle.
        speaker_disjoint (bool): Keep every speaker on one side only.
    """

    train_fraction: float = 0.8
    seed: int = 0
    speaker_disjoint: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if self.seed < 0:
            raise ConfigError(f"seed must be unsigned, got {self.seed}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """
    Counts of (true, predicted) class pairs. Rows are true classes, columns predictions.
    """

    classes: tuple[Hashable, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        k = len(self.classes)
        if counts.shape != (k, k):
            raise ValueError(f"counts must be {k}x{k}, got {counts.shape}")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        """trace / total; undefined for an empty matrix."""
        if self.total == 0:
            raise EmptyEvalError("accuracy of an empty confusion matrix is undefined")
        return float(np.trace(self.counts) / self.total)

    def row(self, label: Hashable) -> np.ndarray:
        return self.counts[self.classes.index(label)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented
        return tuple(map(str, self.classes)) == tuple(map(str, other.classes)) and np.array_equal(
            self.counts, other.counts
        )

    def to_dict(self) -> dict[str, Any]:
        return {"classes": [str(c) for c in self.classes], "counts": self.counts.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ConfusionMatrix":
        return cls(classes=tuple(data["classes"]), counts=np.array(data["counts"], dtype=np.int64))


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    """
    Attributes:
        confusion (ConfusionMatrix): Counts behind every other figure.
        accuracy (float): trace / total.
        per_class (dict[str, ClassMetrics]): Precision, recall, F1 and support per label.
        n_discarded (int): Utterances dropped as too short before evaluation.
    """

    confusion: ConfusionMatrix
    accuracy: float
    per_class: dict[str, ClassMetrics]
    n_discarded: int = 0
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def macro_f1(self) -> float:
        return float(np.mean([m.f1 for m in self.per_class.values()]))

    def to_dict(self) -> dict[str, Any]:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "n_discarded": self.n_discarded,
            "n_evaluated": self.confusion.total,
            "confusion": self.confusion.to_dict(),
            "per_class": {label: asdict(m) for label, m in self.per_class.items()},
            "extra": self.extra,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EvalReport":
        return cls(
            confusion=ConfusionMatrix.from_dict(data["confusion"]),
            accuracy=data["accuracy"],
            per_class={label: ClassMetrics(**m) for label, m in data["per_class"].items()},
            n_discarded=data["n_discarded"],
            extra=data.get("extra", {}),
        )
