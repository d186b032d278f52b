import numpy as np
import pytest

from core.exceptions import BadMagicError, ConfigError, MissingClassError, UnknownLabelError
from emotions.infrastructure.bundle import load_bundle, save_bundle
from emotions.models import (
    FOUR_CLASS,
    ClassifierHead,
    DetectionLabel,
    EmotionLabel,
    HierarchicalClassifier,
    LabeledEmbedding,
    to_detection_label,
)
from emotions.service import (
    EmotionClassifier,
    embedding_matrix,
    four_class_rows,
    predict_hierarchical,
    train_detector,
    train_flat,
    train_head,
    train_hierarchical,
)
from svm.models import BinarySvmModel, MulticlassSvmModel, TrainParams

CENTERS = {
    EmotionLabel.ANGRY: (1.0, 0.0, 0.0),
    EmotionLabel.SAD: (0.0, 1.0, 0.0),
    EmotionLabel.HAPPY: (0.0, 0.0, 1.0),
    EmotionLabel.NEUTRAL: (0.0, 0.0, 0.0),
    EmotionLabel.FEAR: (1.0, 1.0, 1.0),
}


def make_rows(emotions=tuple(CENTERS), per_class=12, seed=0) -> list[LabeledEmbedding]:
    rng = np.random.default_rng(seed)
    rows = []
    for emotion in emotions:
        for k in range(per_class):
            rows.append(
                LabeledEmbedding(
                    embedding=rng.normal(CENTERS[emotion], 0.05),
                    speaker_id=f"spk{k % 3}",
                    utterance_id=f"{emotion.abbreviation}_{k:02d}",
                    emotion=emotion,
                )
            )
    return rows


def constant_binary(bias: float, dim: int = 3) -> BinarySvmModel:
    """A model whose decision is `bias` everywhere."""
    return BinarySvmModel(support_vectors=np.zeros((1, dim)), dual_coefs=[0.0], bias=bias, gamma=1.0)


@pytest.fixture
def rows():
    """Five well-separated emotion clusters, Fear included to check it is ignored."""
    return make_rows()


def test_label_codes_and_parsing():
    assert [label.code for label in EmotionLabel] == [0, 1, 2, 3, 4, 5]
    assert EmotionLabel.from_code(3) == EmotionLabel.NEUTRAL
    assert EmotionLabel.parse("ang") == EmotionLabel.ANGRY
    assert EmotionLabel.parse(" disgust ") == EmotionLabel.DISGUST
    with pytest.raises(UnknownLabelError):
        EmotionLabel.parse("Surprise")
    with pytest.raises(UnknownLabelError):
        EmotionLabel.from_code(6)


def test_detection_mapping():
    assert to_detection_label(EmotionLabel.NEUTRAL) == DetectionLabel.NEUTRAL
    for label in (EmotionLabel.ANGRY, EmotionLabel.SAD, EmotionLabel.HAPPY):
        assert to_detection_label(label) == DetectionLabel.EMOTION_PRESENT


def test_four_class_rows_drops_other_emotions(rows):
    kept = four_class_rows(rows)

    assert len(kept) == 48
    assert {row.emotion for row in kept} == set(FOUR_CLASS)
    assert embedding_matrix(kept).shape == (48, 3)


def test_flat_head_classifies_clusters(rows):
    model = train_flat(rows, TrainParams())
    classifier = EmotionClassifier(head=ClassifierHead.FLAT, model=model)

    assert model.classes == FOUR_CLASS
    assert len(model.pairwise_models) == 6
    test = four_class_rows(make_rows(seed=1))
    assert classifier.predict_many(embedding_matrix(test)) == [row.emotion for row in test]


def test_flat_head_missing_class(rows):
    without_happy = [row for row in rows if row.emotion != EmotionLabel.HAPPY]

    with pytest.raises(MissingClassError) as info:
        train_flat(without_happy, TrainParams())
    assert info.value.missing == [EmotionLabel.HAPPY]


@pytest.mark.parametrize("first_class", FOUR_CLASS)
def test_hierarchical_stage_class_sets(rows, first_class):
    hc = train_hierarchical(rows, first_class, TrainParams())

    assert hc.first_class == first_class
    assert set(hc.stage2.classes) == set(FOUR_CLASS) - {first_class}
    assert hc.remaining_classes == hc.stage2.classes
    assert len(hc.stage2.pairwise_models) == 3


def test_hierarchical_rejects_foreign_first_class(rows):
    with pytest.raises(ConfigError):
        train_hierarchical(rows, EmotionLabel.FEAR, TrainParams())


def test_hierarchical_stage1_needs_strictly_positive_decision(mocker):
    remaining = (EmotionLabel.ANGRY, EmotionLabel.HAPPY, EmotionLabel.NEUTRAL)
    stage2 = MulticlassSvmModel(
        classes=remaining,
        pairwise_models={pair: constant_binary(1.0) for pair in [(0, 1), (0, 2), (1, 2)]},
    )
    x = np.zeros(3)

    at_zero = HierarchicalClassifier(EmotionLabel.SAD, constant_binary(0.0), stage2)
    above = HierarchicalClassifier(EmotionLabel.SAD, constant_binary(1e-9), stage2)

    assert predict_hierarchical(at_zero, x) == EmotionLabel.ANGRY
    spy = mocker.patch("emotions.service.predict_multiclass")
    assert predict_hierarchical(above, x) == EmotionLabel.SAD
    spy.assert_not_called()


def test_hierarchical_predict_many_matches_predict(rows):
    classifier = train_head(ClassifierHead.HIERARCHICAL, rows, TrainParams(), EmotionLabel.HAPPY)
    X = embedding_matrix(four_class_rows(make_rows(seed=2)))

    assert classifier.predict_many(X) == [classifier.predict(x) for x in X]


def test_detector(rows):
    model = train_detector(rows, TrainParams())
    classifier = EmotionClassifier(head=ClassifierHead.DETECTOR, model=model)
    test = four_class_rows(make_rows(seed=3))

    predicted = classifier.predict_many(embedding_matrix(test))

    assert predicted == [classifier.truth(row) for row in test]
    assert classifier.classes == (DetectionLabel.NEUTRAL, DetectionLabel.EMOTION_PRESENT)


def test_detector_needs_neutral(rows):
    emotional = [row for row in rows if row.emotion != EmotionLabel.NEUTRAL]

    with pytest.raises(MissingClassError) as info:
        train_detector(emotional, TrainParams())
    assert info.value.missing == [DetectionLabel.NEUTRAL]


def test_classifier_accepts_four_class_rows_only(rows):
    classifier = train_head(ClassifierHead.DETECTOR, rows, TrainParams())

    fear = next(row for row in rows if row.emotion == EmotionLabel.FEAR)
    angry = next(row for row in rows if row.emotion == EmotionLabel.ANGRY)
    assert not classifier.accepts(fear)
    assert classifier.accepts(angry)
    assert classifier.dim == 3


@pytest.mark.parametrize("head", list(ClassifierHead))
def test_bundle_save_and_load(tmp_path, rows, head):
    classifier = train_head(head, rows, TrainParams(), EmotionLabel.SAD)
    X = embedding_matrix(four_class_rows(make_rows(seed=4)))

    save_bundle(classifier, tmp_path / "bundle", "abc123", extra={"split": {"seed": 0}})
    loaded, manifest = load_bundle(tmp_path / "bundle")

    assert loaded.head == head
    assert manifest["config_hash"] == "abc123"
    assert manifest["split"] == {"seed": 0}
    assert manifest["embedding_dim"] == 3
    assert manifest["class_codes"]["Neutral"] == 3
    assert loaded.predict_many(X) == classifier.predict_many(X)
    if head == ClassifierHead.HIERARCHICAL:
        assert manifest["first_class"] == "Sad"
        assert (tmp_path / "bundle" / "stage1.svm").exists()
        assert (tmp_path / "bundle" / "stage2.svm").exists()


def test_load_bundle_errors(tmp_path):
    with pytest.raises(BadMagicError):
        load_bundle(tmp_path)

    (tmp_path / "manifest.json").write_text('{"format": "other"}', encoding="utf-8")
    with pytest.raises(BadMagicError):
        load_bundle(tmp_path)
