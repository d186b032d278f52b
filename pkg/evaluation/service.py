import logging
from collections import Counter
from collections.abc import Callable, Hashable, Sequence

import numpy as np
from sklearn.metrics import confusion_matrix as sk_confusion_matrix
from sklearn.metrics import precision_recall_fscore_support
from sklearn.neighbors import NearestCentroid

from core.exceptions import (
    EmptyEvalError,
    LengthMismatchError,
    MissingClassError,
    TooFewSpeakersError,
    UnknownLabelError,
)
from emotions.models import (
    DETECTION_CLASSES,
    DetectionLabel,
    EmotionLabel,
    LabeledEmbedding,
    to_detection_label,
)
from emotions.service import EmotionClassifier, embedding_matrix
from evaluation.models import ClassMetrics, ConfusionMatrix, EvalReport, SplitSpec

logger = logging.getLogger(__name__)

Predictor = Callable[[np.ndarray], Hashable]


def split_speaker_disjoint(
    data: Sequence[LabeledEmbedding], spec: SplitSpec
) -> tuple[list[LabeledEmbedding], list[LabeledEmbedding]]:
    """
    Partitions rows into train and test.

    Speaker-disjoint mode shuffles the sorted speaker list with the seeded generator
    and assigns speakers to train while the train share of utterances is below
    `train_fraction`; the rest go to test. At least one speaker stays on each side.
    Otherwise utterances are shuffled individually. Rows keep their input order.

    :raises TooFewSpeakersError: Fewer than two speakers in speaker-disjoint mode.
    """
    rng = np.random.default_rng(spec.seed)

    if not spec.speaker_disjoint:
        n = len(data)
        if n < 2:
            raise EmptyEvalError("need at least two rows to split")
        n_train = min(max(int(round(spec.train_fraction * n)), 1), n - 1)
        train_idx = set(rng.permutation(n)[:n_train].tolist())
        train = [row for i, row in enumerate(data) if i in train_idx]
        test = [row for i, row in enumerate(data) if i not in train_idx]
        return train, test

    per_speaker = Counter(row.speaker_id for row in data)
    speakers = sorted(per_speaker)
    if len(speakers) < 2:
        raise TooFewSpeakersError(f"speaker-disjoint split needs 2 speakers, got {len(speakers)}")

    total = sum(per_speaker.values())
    train_speakers: list[str] = []
    n_train = 0
    for idx in rng.permutation(len(speakers)):
        speaker = speakers[idx]
        if n_train / total < spec.train_fraction:
            train_speakers.append(speaker)
            n_train += per_speaker[speaker]

    if len(train_speakers) == len(speakers):
        train_speakers.pop()

    chosen = set(train_speakers)
    train = [row for row in data if row.speaker_id in chosen]
    test = [row for row in data if row.speaker_id not in chosen]
    logger.info(
        "Split %d speakers: %d train (%d rows), %d test (%d rows).",
        len(speakers),
        len(chosen),
        len(train),
        len(speakers) - len(chosen),
        len(test),
    )
    return train, test


def split_by_tags(
    data: Sequence[LabeledEmbedding],
) -> tuple[list[LabeledEmbedding], list[LabeledEmbedding]] | None:
    """Uses `train` / `test` split tags when every row carries one, else returns None."""
    if not data or any(row.split not in ("train", "test") for row in data):
        return None
    return [r for r in data if r.split == "train"], [r for r in data if r.split == "test"]


def make_split(
    data: Sequence[LabeledEmbedding], spec: SplitSpec
) -> tuple[list[LabeledEmbedding], list[LabeledEmbedding]]:
    tagged = split_by_tags(data)
    if tagged is not None:
        logger.info("Using split tags carried by the data.")
        return tagged
    return split_speaker_disjoint(data, spec)


def _encode(labels: Sequence[Hashable], index: dict, role: str) -> np.ndarray:
    unknown = [label for label in labels if label not in index]
    if unknown:
        raise UnknownLabelError(f"{role} label '{unknown[0]}' is not one of {list(index)}")
    return np.array([index[label] for label in labels], dtype=np.int64)


def confusion_matrix(
    truth: Sequence[Hashable], pred: Sequence[Hashable], classes: Sequence[Hashable]
) -> ConfusionMatrix:
    """
    counts[i][j] = number of samples with true class i predicted as class j.

    :raises LengthMismatchError: truth and pred differ in length.
    :raises UnknownLabelError: A label is not in `classes`.
    """
    if len(truth) != len(pred):
        raise LengthMismatchError(f"{len(truth)} true labels but {len(pred)} predictions")

    index = {c: i for i, c in enumerate(classes)}
    y_true = _encode(truth, index, "true")
    y_pred = _encode(pred, index, "predicted")
    if y_true.size == 0:
        return ConfusionMatrix(
            classes=tuple(classes), counts=np.zeros((len(classes), len(classes)), dtype=np.int64)
        )
    counts = sk_confusion_matrix(y_true, y_pred, labels=np.arange(len(classes)))
    return ConfusionMatrix(classes=tuple(classes), counts=counts.astype(np.int64))


def f1_per_class(cm: ConfusionMatrix) -> dict[str, ClassMetrics]:
    """
    Precision TP/(TP+FP), recall TP/(TP+FN) and F1 per class; 0/0 counts as 0.

    :raises EmptyEvalError: The matrix holds no samples.
    """
    if cm.total == 0:
        raise EmptyEvalError("no samples in the confusion matrix")

    k = len(cm.classes)
    cells = cm.counts.ravel()
    y_true = np.repeat(np.repeat(np.arange(k), k), cells)
    y_pred = np.repeat(np.tile(np.arange(k), k), cells)
    precision, recall, f1, support = precision_recall_fscore_support(
        y_true, y_pred, labels=np.arange(k), zero_division=0
    )
    return {
        str(label): ClassMetrics(float(precision[i]), float(recall[i]), float(f1[i]), int(support[i]))
        for i, label in enumerate(cm.classes)
    }


def build_report(cm: ConfusionMatrix, n_discarded: int = 0, **extra) -> EvalReport:
    return EvalReport(
        confusion=cm,
        accuracy=cm.accuracy,
        per_class=f1_per_class(cm),
        n_discarded=n_discarded,
        extra=dict(extra),
    )


def evaluate(
    predictor: Predictor,
    test: Sequence[LabeledEmbedding],
    classes: Sequence[Hashable],
    truth: Callable[[LabeledEmbedding], Hashable] = lambda row: row.emotion,
    n_discarded: int = 0,
) -> EvalReport:
    """
    Applies the predictor to every test embedding and assembles the report.

    :param predictor: Maps one embedding to a label.
    :param test: Rows to score.
    :param classes: Label order of the confusion matrix.
    :param truth: Expected label of a row.
    :param n_discarded: Too-short utterances dropped upstream, carried into the report.
    :raises EmptyEvalError: `test` is empty.
    """
    if not test:
        raise EmptyEvalError("the test set is empty")
    predictions = [predictor(row.embedding) for row in test]
    cm = confusion_matrix([truth(row) for row in test], predictions, classes)
    return build_report(cm, n_discarded)


def evaluate_classifier(
    classifier: EmotionClassifier, test: Sequence[LabeledEmbedding], n_discarded: int = 0
) -> tuple[EvalReport, list]:
    """
    Scores a trained head on the rows it can label.

    :return: The report and the predictions, aligned with the accepted rows.
    """
    rows = [row for row in test if classifier.accepts(row)]
    if not rows:
        raise EmptyEvalError("no test rows in the classifier's label set")

    predictions = classifier.predict_many(embedding_matrix(rows))
    cm = confusion_matrix([classifier.truth(row) for row in rows], predictions, classifier.classes)
    report = build_report(cm, n_discarded, head=classifier.head.value)
    logger.info(
        "Evaluated %s head on %d rows: accuracy %.4f, macro-F1 %.4f.",
        classifier.head.value,
        len(rows),
        report.accuracy,
        report.macro_f1,
    )
    return report, predictions


def collapse_to_detection(labels: Sequence[EmotionLabel]) -> list[DetectionLabel]:
    """Maps 4-class labels to Neutral / EmotionPresent."""
    return [to_detection_label(label) for label in labels]


def detection_report(
    truth: Sequence[EmotionLabel], pred: Sequence[EmotionLabel], n_discarded: int = 0
) -> EvalReport:
    """Scores 4-class predictions on the detection task."""
    cm = confusion_matrix(
        collapse_to_detection(truth), collapse_to_detection(pred), DETECTION_CLASSES
    )
    return build_report(cm, n_discarded, task="detection-from-4-class")


class NearestCentroidClassifier:
    """Assigns the class whose mean training embedding is closest in Euclidean distance."""

    def __init__(self, classes: Sequence[Hashable]):
        self.classes = tuple(classes)
        self.model: NearestCentroid | None = None

    def fit(
        self,
        rows: Sequence[LabeledEmbedding],
        label: Callable[[LabeledEmbedding], Hashable] = lambda row: row.emotion,
    ) -> "NearestCentroidClassifier":
        rows = [row for row in rows if label(row) in self.classes]
        present = {label(row) for row in rows}
        missing = [c for c in self.classes if c not in present]
        if missing:
            raise MissingClassError(missing)
        codes = [self.classes.index(label(row)) for row in rows]
        self.model = NearestCentroid().fit(embedding_matrix(rows), codes)
        return self

    def predict(self, x: np.ndarray) -> Hashable:
        if self.model is None:
            raise RuntimeError("NearestCentroidClassifier.fit must be called first")
        code = self.model.predict(np.asarray(x, dtype=np.float64)[None, :])[0]
        return self.classes[int(code)]
