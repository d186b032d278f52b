import itertools
import logging
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from core.exceptions import DimMismatchError, EmptyScoresError, MissingNeutralError, ZeroVectorError
from emotions.models import SIX_CLASS, EmotionLabel, LabeledEmbedding
from matchscore.models import BoxStats, MatchScoreResult, PairingKind, ScoreRecord

logger = logging.getLogger(__name__)

DEFAULT_IMPOSTOR_CAP = 10_000
WHISKER_IQR = 1.5


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """
    a.b / (|a| |b|), clipped to [-1, 1].

    :raises DimMismatchError: Vectors differ in length.
    :raises ZeroVectorError: Either vector has zero norm.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimMismatchError(a.shape[0], b.shape[0])
    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVectorError("cosine similarity of a zero vector is undefined")
    return float(np.clip(np.dot(a, b) / (norm_a * norm_b), -1.0, 1.0))


def enumerate_pairings(emotions: Sequence[EmotionLabel] = SIX_CLASS) -> list[PairingKind]:
    """
    Every unordered pair of distinct emotions in label-code order, followed by the
    genuine and impostor neutral baselines.
    """
    unique = sorted(set(emotions), key=lambda e: e.code)
    if len(unique) < 2:
        raise ValueError(f"need at least two emotions, got {len(unique)}")
    kinds = [PairingKind.inter(e1, e2) for e1, e2 in itertools.combinations(unique, 2)]
    return [*kinds, PairingKind.genuine(), PairingKind.impostor()]


def _score(kind: PairingKind, speaker_id: str, a: LabeledEmbedding, b: LabeledEmbedding):
    return ScoreRecord(kind, speaker_id, cosine_similarity(a.embedding, b.embedding))


def _inter_emotion(
    by_speaker: dict[str, list[LabeledEmbedding]], kinds: Iterable[PairingKind]
) -> dict[PairingKind, list[ScoreRecord]]:
    records: dict[PairingKind, list[ScoreRecord]] = defaultdict(list)
    kinds = list(kinds)
    for speaker_id, rows in by_speaker.items():
        cells: dict[tuple[str, EmotionLabel], list[LabeledEmbedding]] = defaultdict(list)
        for row in rows:
            if row.sentence_id is not None:
                cells[(row.sentence_id, row.emotion)].append(row)
        sentences = sorted({sentence for sentence, _ in cells})
        for kind in kinds:
            for sentence in sentences:
                for a in cells.get((sentence, kind.first), []):
                    for b in cells.get((sentence, kind.second), []):
                        records[kind].append(_score(kind, speaker_id, a, b))
    return records


def _genuine_neutral(neutral: dict[str, list[LabeledEmbedding]]) -> list[ScoreRecord]:
    kind = PairingKind.genuine()
    return [
        _score(kind, speaker_id, a, b)
        for speaker_id, rows in neutral.items()
        for a, b in itertools.combinations(rows, 2)
    ]


@dataclass(frozen=True)
class _PairBlock:
    """Every (a, b) with a from `left` and b from `right`, addressed by a flat index."""

    pair_id: str
    left: Sequence[LabeledEmbedding]
    right: Sequence[LabeledEmbedding]

    @property
    def size(self) -> int:
        return len(self.left) * len(self.right)

    def pair(self, k: int) -> tuple[LabeledEmbedding, LabeledEmbedding]:
        i, j = divmod(k, len(self.right))
        return self.left[i], self.right[j]


def _by_sentence(rows: Iterable[LabeledEmbedding]) -> dict[str, list[LabeledEmbedding]]:
    groups: dict[str, list[LabeledEmbedding]] = defaultdict(list)
    for row in rows:
        if row.sentence_id is not None:
            groups[row.sentence_id].append(row)
    return groups


def _impostor_blocks(neutral: dict[str, list[LabeledEmbedding]]) -> list[_PairBlock]:
    """Cross-speaker neutral pairs, restricted to shared sentences when a speaker pair has any."""
    blocks = []
    for s1, s2 in itertools.combinations(sorted(neutral), 2):
        pair_id = f"{s1}|{s2}"
        left, right = _by_sentence(neutral[s1]), _by_sentence(neutral[s2])
        shared = sorted(left.keys() & right.keys())
        if shared:
            blocks.extend(_PairBlock(pair_id, left[s], right[s]) for s in shared)
        else:
            blocks.append(_PairBlock(pair_id, neutral[s1], neutral[s2]))
    return blocks


def sample_impostor_pairs(
    neutral: dict[str, list[LabeledEmbedding]], cap: int = DEFAULT_IMPOSTOR_CAP, seed: int = 0
) -> list[tuple[str, LabeledEmbedding, LabeledEmbedding]]:
    """
    Picks the impostor-neutral pairs to score: all of them up to `cap`, otherwise `cap`
    distinct pairs drawn with `seed`. Pairs are addressed by index, so only the kept
    ones are ever built.

    :param neutral: Neutral utterances per speaker.
    :return: (speaker pair id, a, b) triples in enumeration order.
    """
    blocks = _impostor_blocks(neutral)
    offsets = np.cumsum([0, *(block.size for block in blocks)])
    total = int(offsets[-1])
    if total > cap:
        logger.info("Subsampling %d of %d impostor pairs.", cap, total)
        indices = np.sort(np.random.default_rng(seed).choice(total, size=cap, replace=False))
    else:
        indices = np.arange(total)

    owners = np.searchsorted(offsets, indices, side="right") - 1
    pairs = []
    for k, owner in zip(indices.tolist(), owners.tolist(), strict=True):
        block = blocks[owner]
        pairs.append((block.pair_id, *block.pair(k - int(offsets[owner]))))
    return pairs


def run_matchscore_experiment(
    data: Sequence[LabeledEmbedding],
    emotions: Sequence[EmotionLabel] = SIX_CLASS,
    impostor_cap: int = DEFAULT_IMPOSTOR_CAP,
    seed: int = 0,
) -> MatchScoreResult:
    """
    Scores intra-speaker variation across emotions.

    Inter-emotion scores compare a speaker's utterances of the same sentence spoken
    with two different emotions. Genuine-neutral scores compare two different neutral
    utterances of one speaker; impostor-neutral scores compare neutral utterances of
    two speakers. Impostor pairs beyond `impostor_cap` are subsampled with `seed`.

    :raises MissingNeutralError: The data holds no Neutral utterances.
    """
    neutral: dict[str, list[LabeledEmbedding]] = defaultdict(list)
    by_speaker: dict[str, list[LabeledEmbedding]] = defaultdict(list)
    for row in data:
        by_speaker[row.speaker_id].append(row)
        if row.emotion == EmotionLabel.NEUTRAL:
            neutral[row.speaker_id].append(row)
    if not neutral:
        raise MissingNeutralError("the match-score baselines need Neutral utterances")

    kinds = enumerate_pairings(emotions)
    inter_kinds = kinds[:-2]
    records = _inter_emotion(by_speaker, inter_kinds)
    records[PairingKind.genuine()] = _genuine_neutral(neutral)

    impostor = PairingKind.impostor()
    records[impostor] = [
        _score(impostor, pair_id, a, b)
        for pair_id, a, b in sample_impostor_pairs(neutral, impostor_cap, seed)
    ]

    result = MatchScoreResult(kinds=kinds)
    for kind in kinds:
        if records.get(kind):
            result.records[kind] = records[kind]
        else:
            logger.warning("No eligible pairs for %s.", kind.label)
            result.missing.append(kind)
    logger.info(
        "Match scores: %d records over %d kinds, %d kinds empty.",
        len(result.all_records()),
        len(kinds),
        len(result.missing),
    )
    return result


def box_stats(scores: Sequence[float]) -> BoxStats:
    """
    Five-number summary with Tukey whiskers.

    Quartiles use the exclusive-median rule: q1 and q3 are the medians of the lower
    and upper halves of the sorted scores, leaving the overall median out of both
    halves when n is odd. A single score gives all five numbers equal to it.

    :raises EmptyScoresError: No scores.
    """
    x = np.sort(np.asarray(scores, dtype=np.float64))
    n = x.shape[0]
    if n == 0:
        raise EmptyScoresError("box statistics of an empty score list")

    median = float(np.median(x))
    if n == 1:
        q1 = q3 = median
    else:
        q1 = float(np.median(x[: n // 2]))
        q3 = float(np.median(x[(n + 1) // 2 :]))

    iqr = q3 - q1
    low_fence = q1 - WHISKER_IQR * iqr
    high_fence = q3 + WHISKER_IQR * iqr
    inside = x[(x >= low_fence) & (x <= high_fence)]
    return BoxStats(
        n=n,
        min=float(x[0]),
        q1=q1,
        median=median,
        q3=q3,
        max=float(x[-1]),
        whisker_low=min(float(inside[0]), q1),
        whisker_high=max(float(inside[-1]), q3),
        n_outliers=int(n - inside.shape[0]),
    )


def summarize(result: MatchScoreResult) -> dict[PairingKind, BoxStats]:
    """Box statistics for every kind that has scores, in report order."""
    return {kind: box_stats(result.scores(kind)) for kind in result.kinds if kind in result.records}
