import csv
import math

import numpy as np
import pytest

from core.exceptions import DimMismatchError, EmptyScoresError, MissingNeutralError, ZeroVectorError
from emotions.models import FOUR_CLASS, SIX_CLASS, EmotionLabel, LabeledEmbedding
from matchscore.infrastructure.export import read_box_stats_json, write_box_stats_json, write_scores_csv
from matchscore.models import PairingCategory, PairingKind
from matchscore.service import (
    box_stats,
    cosine_similarity,
    enumerate_pairings,
    run_matchscore_experiment,
    sample_impostor_pairs,
    summarize,
)

ANG, SAD, HAP, NEU = FOUR_CLASS


def utterance(speaker, emotion, sentence="IEO", vector=None, k=0, seed=0) -> LabeledEmbedding:
    if vector is None:
        vector = np.random.default_rng([seed, emotion.code, k, sum(map(ord, speaker))]).standard_normal(8)
    return LabeledEmbedding(
        embedding=vector,
        speaker_id=speaker,
        utterance_id=f"{speaker}_{emotion.abbreviation}_{sentence}_{k}",
        emotion=emotion,
        sentence_id=sentence,
    )


@pytest.fixture
def two_speaker_corpus():
    """Two speakers, one sentence, one utterance per emotion."""
    return [utterance(spk, emotion) for spk in ("spk000", "spk001") for emotion in SIX_CLASS]


def test_cosine_similarity():
    v = np.array([0.3, -2.0, 1.0])

    assert cosine_similarity(v, v) == pytest.approx(1.0)
    assert cosine_similarity([1.0, 0.0], [0.0, 1.0]) == 0.0
    assert cosine_similarity([1.0, 0.0], [1.0, 1.0]) == pytest.approx(1 / math.sqrt(2))
    with pytest.raises(ZeroVectorError):
        cosine_similarity([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(DimMismatchError):
        cosine_similarity([1.0, 0.0], [1.0, 0.0, 0.0])


@pytest.mark.parametrize(("emotions", "n_pairs"), [(SIX_CLASS, 15), (FOUR_CLASS, 6), ((ANG, SAD), 1)])
def test_enumerate_pairings_counts(emotions, n_pairs):
    kinds = enumerate_pairings(emotions)

    inter = [k for k in kinds if k.category == PairingCategory.INTER_EMOTION]
    assert len(inter) == n_pairs
    assert kinds[-2:] == [PairingKind.genuine(), PairingKind.impostor()]
    assert all(k.first.code < k.second.code for k in inter)


def test_enumerate_pairings_needs_two_emotions():
    with pytest.raises(ValueError):
        enumerate_pairings([ANG])


def test_pairing_kind_is_unordered():
    assert PairingKind.inter(SAD, ANG) == PairingKind.inter(ANG, SAD)
    assert PairingKind.inter(SAD, ANG).label == "ANG-SAD"
    assert PairingKind.parse("ANG-SAD") == PairingKind.inter(ANG, SAD)
    assert PairingKind.parse("GenuineNeutral") == PairingKind.genuine()
    with pytest.raises(ValueError):
        PairingKind.inter(ANG, ANG)


def test_two_speaker_experiment(two_speaker_corpus):
    result = run_matchscore_experiment(two_speaker_corpus)

    inter = [k for k in result.kinds if k.category == PairingCategory.INTER_EMOTION]
    assert len(inter) == 15
    for kind in inter:
        assert len(result.records[kind]) == 2
        assert {r.speaker_id for r in result.records[kind]} == {"spk000", "spk001"}
    assert result.missing == [PairingKind.genuine()]
    assert [r.speaker_id for r in result.records[PairingKind.impostor()]] == ["spk000|spk001"]


def test_identical_embeddings_score_one():
    v = np.array([1.0, 2.0, 3.0])
    data = [
        utterance("a", ANG, vector=v),
        utterance("a", HAP, vector=v),
        utterance("a", NEU, vector=np.array([3.0, 2.0, 1.0])),
    ]

    result = run_matchscore_experiment(data, emotions=(ANG, HAP, NEU))

    assert result.scores(PairingKind.inter(ANG, HAP)).tolist() == [pytest.approx(1.0)]
    assert PairingKind.impostor() in result.missing


def test_inter_emotion_pairs_need_the_same_sentence():
    data = [
        utterance("a", ANG, sentence="IEO"),
        utterance("a", SAD, sentence="TIE"),
        utterance("a", NEU, sentence="IEO", k=0),
        utterance("a", NEU, sentence="TIE", k=1),
    ]

    result = run_matchscore_experiment(data, emotions=(ANG, SAD, NEU))

    assert PairingKind.inter(ANG, SAD) in result.missing
    assert len(result.records[PairingKind.inter(ANG, NEU)]) == 1
    assert len(result.records[PairingKind.genuine()]) == 1


def test_impostor_pairs_are_capped_deterministically():
    data = [
        utterance(f"s{s}", NEU, sentence="IEO", k=k) for s in range(4) for k in range(5)
    ]

    full = run_matchscore_experiment(data, emotions=(ANG, NEU))
    capped = run_matchscore_experiment(data, emotions=(ANG, NEU), impostor_cap=20, seed=3)
    again = run_matchscore_experiment(data, emotions=(ANG, NEU), impostor_cap=20, seed=3)

    assert len(full.records[PairingKind.impostor()]) == 6 * 25
    assert len(capped.records[PairingKind.impostor()]) == 20
    assert capped.scores(PairingKind.impostor()).tolist() == again.scores(PairingKind.impostor()).tolist()
    assert len(full.records[PairingKind.genuine()]) == 4 * 10


def test_impostor_sampling_on_a_large_pool():
    """A hundred and sixty million candidate pairs, fifty kept, drawn without building the pool."""
    vector = np.ones(2)
    neutral = {
        spk: [LabeledEmbedding(vector, spk, f"{spk}_{k}", NEU) for k in range(4000)]
        for spk in ("s0", "s1", "s2", "s3", "s4")
    }

    def ids(seed):
        return [(a.utterance_id, b.utterance_id) for _, a, b in sample_impostor_pairs(neutral, 50, seed)]

    pairs = sample_impostor_pairs(neutral, cap=50, seed=1)

    assert len(pairs) == 50
    assert ids(1) == ids(1)
    assert ids(1) != ids(2)
    assert len(set(ids(1))) == 50
    for pair_id, a, b in pairs:
        assert pair_id == f"{a.speaker_id}|{b.speaker_id}"
        assert a.speaker_id < b.speaker_id


def test_impostor_pairs_prefer_shared_sentences():
    neutral = {
        "s0": [utterance("s0", NEU, "IEO"), utterance("s0", NEU, "TIE")],
        "s1": [utterance("s1", NEU, "IEO"), utterance("s1", NEU, "DFA", k=1)],
        "s2": [utterance("s2", NEU, "MTI")],
    }

    pairs = [(p, a.sentence_id, b.sentence_id) for p, a, b in sample_impostor_pairs(neutral)]

    assert pairs == [
        ("s0|s1", "IEO", "IEO"),
        ("s0|s2", "IEO", "MTI"),
        ("s0|s2", "TIE", "MTI"),
        ("s1|s2", "IEO", "MTI"),
        ("s1|s2", "DFA", "MTI"),
    ]


def test_missing_neutral():
    with pytest.raises(MissingNeutralError):
        run_matchscore_experiment([utterance("a", ANG), utterance("a", SAD)])


def test_box_stats_examples():
    three = box_stats([0.3, 0.1, 0.2])
    single = box_stats([0.42])
    skewed = box_stats([1, 2, 3, 4, 5, 6, 100])

    assert (three.q1, three.median, three.q3, three.n_outliers) == (0.1, 0.2, 0.3, 0)
    assert (single.min, single.q1, single.median, single.q3, single.max) == (0.42,) * 5
    assert (skewed.q1, skewed.median, skewed.q3) == (2.0, 4.0, 6.0)
    assert skewed.whisker_high == 6.0
    assert skewed.n_outliers == 1
    assert skewed.max == 100.0
    with pytest.raises(EmptyScoresError):
        box_stats([])


def test_export(tmp_path, two_speaker_corpus):
    result = run_matchscore_experiment(two_speaker_corpus)

    scores_path = write_scores_csv(result, tmp_path / "scores.csv")
    stats_path = write_box_stats_json(result, tmp_path / "box_stats.json", seed=0)

    with scores_path.open(newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 15 * 2 + 1
    assert rows[0]["pairing_kind"] == "ANG-SAD"
    stats = read_box_stats_json(stats_path)
    assert stats["no_eligible_pairs"] == ["GenuineNeutral"]
    assert stats["box_stats"]["ImpostorNeutral"]["n"] == 1
    assert stats["run"] == {"seed": 0}
    assert set(stats["box_stats"]) == {kind.label for kind in summarize(result)}
