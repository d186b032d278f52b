import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from core.exceptions import ConfigError, DimMismatchError, EmptyInputError, MissingClassError
from emotions.models import (
    DETECTION_CLASSES,
    FOUR_CLASS,
    ClassifierHead,
    DetectionLabel,
    EmotionLabel,
    HierarchicalClassifier,
    LabeledEmbedding,
    to_detection_label,
)
from svm.models import BinarySvmModel, MulticlassSvmModel, TrainParams
from svm.multiclass import predict_multiclass, predict_multiclass_many, train_multiclass
from svm.solver import decision_function, decision_values, train_binary_smo

logger = logging.getLogger(__name__)


def four_class_rows(rows: Sequence[LabeledEmbedding]) -> list[LabeledEmbedding]:
    """Keeps the rows labelled Angry, Sad, Happy or Neutral."""
    kept = [row for row in rows if row.emotion in FOUR_CLASS]
    if len(kept) < len(rows):
        logger.info("Ignoring %d rows outside the 4-class set.", len(rows) - len(kept))
    return kept


def embedding_matrix(rows: Sequence[LabeledEmbedding]) -> np.ndarray:
    """Stacks row embeddings into an (n, dim) matrix."""
    if not rows:
        raise EmptyInputError("no embeddings given")
    dim = rows[0].dim
    for row in rows:
        if row.dim != dim:
            raise DimMismatchError(dim, row.dim)
    return np.vstack([row.embedding for row in rows])


def _require_classes(rows: Sequence[LabeledEmbedding], needed: Sequence[EmotionLabel]) -> None:
    present = {row.emotion for row in rows}
    missing = [label for label in needed if label not in present]
    if missing:
        raise MissingClassError(missing)


def train_flat(
    train: Sequence[LabeledEmbedding], params: TrainParams, n_jobs: int = 1
) -> MulticlassSvmModel:
    """
    Baseline head: a single one-vs-one 4-class SVM over Angry, Sad, Happy, Neutral.

    :raises MissingClassError: Some of the four classes have no training rows.
    """
    rows = four_class_rows(train)
    _require_classes(rows, FOUR_CLASS)
    return train_multiclass(
        embedding_matrix(rows),
        [row.emotion for row in rows],
        params,
        classes=FOUR_CLASS,
        n_jobs=n_jobs,
    )


def train_hierarchical(
    train: Sequence[LabeledEmbedding],
    first_class: EmotionLabel = EmotionLabel.SAD,
    params: TrainParams | None = None,
    n_jobs: int = 1,
) -> HierarchicalClassifier:
    """
    Two-stage head. Stage 1 is trained on every row relabelled
    {first_class: +1, rest: -1}; stage 2 only on rows of the other three classes.

    :raises MissingClassError: Some of the four classes have no training rows.
    """
    params = params or TrainParams()
    if first_class not in FOUR_CLASS:
        raise ConfigError(f"first class must be one of the 4-class set, got {first_class}")

    rows = four_class_rows(train)
    _require_classes(rows, FOUR_CLASS)

    X = embedding_matrix(rows)
    y = np.array([1.0 if row.emotion == first_class else -1.0 for row in rows])
    logger.info("Training %s-first stage 1 on %d rows.", first_class.value, len(rows))
    stage1 = train_binary_smo(X, y, params)

    remaining = tuple(c for c in FOUR_CLASS if c != first_class)
    rest = [row for row in rows if row.emotion != first_class]
    stage2 = train_multiclass(
        embedding_matrix(rest),
        [row.emotion for row in rest],
        params,
        classes=remaining,
        n_jobs=n_jobs,
    )
    return HierarchicalClassifier(first_class=first_class, stage1=stage1, stage2=stage2)


def predict_hierarchical(hc: HierarchicalClassifier, x: np.ndarray) -> EmotionLabel:
    """
    first_class when stage 1's decision is strictly positive, otherwise stage 2's
    prediction. Stage 2 is not evaluated when stage 1 fires.
    """
    if decision_function(hc.stage1, x) > 0:
        return hc.first_class
    return EmotionLabel(predict_multiclass(hc.stage2, x))


def train_detector(train: Sequence[LabeledEmbedding], params: TrainParams) -> BinarySvmModel:
    """
    Emotion detector: Neutral -> -1, Angry / Sad / Happy -> +1.

    :raises MissingClassError: No Neutral rows, or no emotional rows.
    """
    rows = four_class_rows(train)
    labels = {to_detection_label(row.emotion) for row in rows}
    missing = [label for label in DETECTION_CLASSES if label not in labels]
    if missing:
        raise MissingClassError(missing)

    y = np.array([1.0 if row.emotion != EmotionLabel.NEUTRAL else -1.0 for row in rows])
    logger.info("Training emotion detector on %d rows (%d emotional).", len(rows), int((y > 0).sum()))
    return train_binary_smo(embedding_matrix(rows), y, params)


def predict_detector(model: BinarySvmModel, x: np.ndarray) -> DetectionLabel:
    """EmotionPresent for a strictly positive decision, Neutral otherwise."""
    if decision_function(model, x) > 0:
        return DetectionLabel.EMOTION_PRESENT
    return DetectionLabel.NEUTRAL


@dataclass(frozen=True)
class EmotionClassifier:
    """
    A trained head with a uniform prediction interface.

    Attributes:
        head (ClassifierHead): Which of the three heads this is.
        model: MulticlassSvmModel, HierarchicalClassifier or BinarySvmModel.
    """

    head: ClassifierHead
    model: MulticlassSvmModel | HierarchicalClassifier | BinarySvmModel

    @property
    def classes(self) -> tuple:
        """Label set of the head's predictions, in report order."""
        return DETECTION_CLASSES if self.head == ClassifierHead.DETECTOR else FOUR_CLASS

    @property
    def dim(self) -> int:
        if isinstance(self.model, HierarchicalClassifier):
            return self.model.stage1.dim
        return self.model.dim

    def truth(self, row: LabeledEmbedding) -> EmotionLabel | DetectionLabel:
        """The label a row should receive from this head."""
        if self.head == ClassifierHead.DETECTOR:
            return to_detection_label(row.emotion)
        return row.emotion

    def accepts(self, row: LabeledEmbedding) -> bool:
        return row.emotion in FOUR_CLASS

    def predict(self, x: np.ndarray) -> EmotionLabel | DetectionLabel:
        if self.head == ClassifierHead.FLAT:
            return EmotionLabel(predict_multiclass(self.model, x))
        if self.head == ClassifierHead.HIERARCHICAL:
            return predict_hierarchical(self.model, x)
        return predict_detector(self.model, x)

    def predict_many(self, X: np.ndarray) -> list[EmotionLabel | DetectionLabel]:
        """Vectorised prediction with the same rules as `predict`."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.head == ClassifierHead.FLAT:
            return [EmotionLabel(c) for c in predict_multiclass_many(self.model, X)]
        if self.head == ClassifierHead.DETECTOR:
            return [
                DetectionLabel.EMOTION_PRESENT if d > 0 else DetectionLabel.NEUTRAL
                for d in decision_values(self.model, X)
            ]

        fires = decision_values(self.model.stage1, X) > 0
        predictions: list[EmotionLabel] = [self.model.first_class] * X.shape[0]
        rest = np.flatnonzero(~fires)
        if rest.shape[0]:
            for idx, label in zip(rest, predict_multiclass_many(self.model.stage2, X[rest]), strict=True):
                predictions[idx] = EmotionLabel(label)
        return predictions


def train_head(
    head: ClassifierHead,
    train: Sequence[LabeledEmbedding],
    params: TrainParams,
    first_class: EmotionLabel = EmotionLabel.SAD,
    n_jobs: int = 1,
) -> EmotionClassifier:
    """Trains the requested head and wraps it in an EmotionClassifier."""
    if head == ClassifierHead.FLAT:
        model = train_flat(train, params, n_jobs=n_jobs)
    elif head == ClassifierHead.HIERARCHICAL:
        model = train_hierarchical(train, first_class, params, n_jobs=n_jobs)
    else:
        model = train_detector(train, params)
    return EmotionClassifier(head=head, model=model)
