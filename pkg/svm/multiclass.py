import logging
from collections.abc import Hashable, Sequence
from itertools import combinations

import numpy as np
from joblib import Parallel, delayed

from core.exceptions import (
    DimMismatchError,
    MissingClassError,
    PairTrainingError,
    PipelineError,
    SingleClassInputError,
)
from svm.models import BinarySvmModel, MulticlassSvmModel, TrainParams
from svm.solver import decision_values, train_binary_smo

logger = logging.getLogger(__name__)


def _train_pair(
    X: np.ndarray,
    labels: np.ndarray,
    positive: Hashable,
    negative: Hashable,
    params: TrainParams,
) -> BinarySvmModel:
    mask = (labels == positive) | (labels == negative)
    y = np.where(labels[mask] == positive, 1.0, -1.0)
    try:
        return train_binary_smo(X[mask], y, params)
    except PipelineError as e:
        raise PairTrainingError((str(positive), str(negative)), e) from e


def train_multiclass(
    X: np.ndarray,
    labels: Sequence[Hashable],
    params: TrainParams,
    classes: Sequence[Hashable] | None = None,
    n_jobs: int = 1,
) -> MulticlassSvmModel:
    """
    One-vs-one ensemble: one binary SVM per unordered class pair, each trained on
    that pair's samples only.

    :param X: (n, dim) embeddings.
    :param labels: Class of each row.
    :param params: Hyperparameters shared by all pairs.
    :param classes: Class order; defaults to the sorted distinct labels.
    :param n_jobs: Pairs trained concurrently through joblib.
    :raises MissingClassError: A declared class has no samples.
    :raises PairTrainingError: A pairwise problem could not be trained.
    """
    X = np.asarray(X, dtype=np.float64)
    label_array = np.empty(len(labels), dtype=object)
    label_array[:] = list(labels)

    present = set(label_array.tolist())
    classes = tuple(classes) if classes is not None else tuple(sorted(present))
    missing = [c for c in classes if c not in present]
    if missing:
        raise MissingClassError(missing)
    if len(classes) < 2:
        raise SingleClassInputError("multiclass training needs at least two classes")

    pairs = list(combinations(range(len(classes)), 2))
    logger.info(
        "Training %d pairwise SVMs over %d classes on %d samples.", len(pairs), len(classes), len(X)
    )

    models = Parallel(n_jobs=n_jobs)(
        delayed(_train_pair)(X, label_array, classes[i], classes[j], params) for i, j in pairs
    )
    return MulticlassSvmModel(classes=classes, pairwise_models=dict(zip(pairs, models, strict=True)))


def pairwise_decisions(model: MulticlassSvmModel, X: np.ndarray) -> dict[tuple[int, int], np.ndarray]:
    """Decision values of every pairwise model for every row of X."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.dim:
        raise DimMismatchError(model.dim, X.shape[1])
    return {pair: decision_values(m, X) for pair, m in model.pairwise_models.items()}


def vote(n_classes: int, decisions: dict[tuple[int, int], float]) -> int:
    """
    Majority vote over pairwise decisions. A positive value votes for the first class
    of the pair, zero or negative for the second. Ties go to the class with the larger
    sum of winning |decision| values clamped to [-1, 1], then to the earlier class.

    :return: Index of the winning class.
    """
    votes = np.zeros(n_classes, dtype=np.int64)
    confidence = np.zeros(n_classes)
    for (i, j), value in decisions.items():
        winner = i if value > 0 else j
        votes[winner] += 1
        confidence[winner] += min(abs(value), 1.0)

    tied = np.flatnonzero(votes == votes.max())
    if tied.shape[0] == 1:
        return int(tied[0])
    best = confidence[tied].max()
    return int(tied[confidence[tied] == best][0])


def predict_multiclass_many(model: MulticlassSvmModel, X: np.ndarray) -> list[Hashable]:
    decisions = pairwise_decisions(model, X)
    n = np.atleast_2d(X).shape[0]
    return [
        model.classes[vote(model.n_classes, {pair: float(d[row]) for pair, d in decisions.items()})]
        for row in range(n)
    ]


def predict_multiclass(model: MulticlassSvmModel, x: np.ndarray) -> Hashable:
    """
    Predicts the class of one embedding by one-vs-one voting.

    :raises DimMismatchError: x does not match the model dimension.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("predict_multiclass expects a single embedding")
    return predict_multiclass_many(model, x[None, :])[0]
