"""End-to-end checks on the default synthetic corpus."""

import numpy as np
import pytest

from emotions.models import FOUR_CLASS, ClassifierHead, EmotionLabel
from emotions.service import train_head
from evaluation.models import SplitSpec
from evaluation.service import NearestCentroidClassifier, evaluate, evaluate_classifier, make_split
from matchscore.models import PairingCategory, PairingKind
from matchscore.service import run_matchscore_experiment, summarize
from svm.models import TrainParams
from svm.solver import decision_values
from synthlab.models import SynthConfig
from synthlab.service import gen_synthetic_corpus


@pytest.fixture(scope="module")
def split():
    """Speaker-disjoint 80/20 split of the default synthetic corpus."""
    rows = gen_synthetic_corpus(SynthConfig())
    return make_split(rows, SplitSpec(train_fraction=0.8, seed=0))


@pytest.fixture(scope="module")
def four_class_test(split):
    return [row for row in split[1] if row.emotion in FOUR_CLASS]


def test_split_holds_out_whole_speakers(split):
    train, test = split

    assert len({row.speaker_id for row in train}) == 8
    assert {row.speaker_id for row in train}.isdisjoint({row.speaker_id for row in test})


def test_flat_head_tracks_centroid_oracle(split, four_class_test):
    train, test = split

    flat = train_head(ClassifierHead.FLAT, train, TrainParams())
    report, _ = evaluate_classifier(flat, test)
    oracle = NearestCentroidClassifier(FOUR_CLASS).fit(train)
    oracle_report = evaluate(oracle.predict, four_class_test, FOUR_CLASS)

    assert report.accuracy >= 0.9
    assert abs(report.accuracy - oracle_report.accuracy) <= 0.1


def test_hierarchical_first_stage_decides_first_class(split):
    train, test = split
    classifier = train_head(ClassifierHead.HIERARCHICAL, train, TrainParams(), EmotionLabel.SAD)
    rows = [row for row in test if classifier.accepts(row)]
    X = np.vstack([row.embedding for row in rows])

    predictions = classifier.predict_many(X)
    fires = decision_values(classifier.model.stage1, X) > 0

    assert [p == EmotionLabel.SAD for p in predictions] == fires.tolist()


def test_detector_accuracy(split):
    train, test = split

    detector = train_head(ClassifierHead.DETECTOR, train, TrainParams())
    report, _ = evaluate_classifier(detector, test)

    assert report.accuracy >= 0.9


def test_sad_first_hierarchy_recall_on_weak_sad():
    rows = gen_synthetic_corpus(SynthConfig(emotion_scales={EmotionLabel.SAD: 0.8}))
    train, test = make_split(rows, SplitSpec())

    flat_report, _ = evaluate_classifier(train_head(ClassifierHead.FLAT, train, TrainParams()), test)
    hc = train_head(ClassifierHead.HIERARCHICAL, train, TrainParams(), EmotionLabel.SAD)
    hc_report, _ = evaluate_classifier(hc, test)

    assert hc_report.per_class["Sad"].recall >= flat_report.per_class["Sad"].recall


def test_match_score_ordering():
    result = run_matchscore_experiment(gen_synthetic_corpus(SynthConfig()))
    medians = {kind: box.median for kind, box in summarize(result).items()}

    inter = [k for k in result.kinds if k.category == PairingCategory.INTER_EMOTION]
    assert len(inter) == 15
    assert not result.missing
    for kind in inter:
        assert medians[PairingKind.impostor()] < medians[kind] < medians[PairingKind.genuine()]
