import logging

import numpy as np
from joblib import Parallel, delayed

from core.exceptions import ConfigError
from emotions.models import SIX_CLASS, EmotionLabel, LabeledEmbedding
from synthlab.models import SynthConfig

logger = logging.getLogger(__name__)


def speaker_id(index: int) -> str:
    return f"spk{index:03d}"


def emotion_offsets(config: SynthConfig, rng: np.random.Generator) -> dict[EmotionLabel, np.ndarray]:
    """
    One offset per emotion, shared by every speaker. Neutral is pinned to zero.
    Offsets are drawn for all six labels in code order, so a subset of emotions
    sees the same offsets as the full set.
    """
    per_component = config.emotion_offset_scale / np.sqrt(config.dim)
    offsets = {}
    for emotion in SIX_CLASS:
        draw = rng.standard_normal(config.dim)
        if emotion == EmotionLabel.NEUTRAL:
            offsets[emotion] = np.zeros(config.dim)
        else:
            offsets[emotion] = draw * (per_component * config.emotion_scale(emotion))
    return offsets


def _normalize(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ConfigError("synthetic configuration produces zero-length embeddings")
    return v / norm


def _speaker_rows(
    index: int,
    seed_seq: np.random.SeedSequence,
    offsets: dict[EmotionLabel, np.ndarray],
    config: SynthConfig,
) -> list[LabeledEmbedding]:
    rng = np.random.default_rng(seed_seq)
    centroid = rng.standard_normal(config.dim) * config.speaker_scale
    norm = np.linalg.norm(centroid)
    if norm > 0.0:
        centroid = centroid / norm

    noise_component = config.noise_scale / np.sqrt(config.dim)
    spk = speaker_id(index)
    rows = []
    for emotion in config.emotions:
        for k in range(config.utterances_per_cell):
            noise = rng.standard_normal(config.dim) * noise_component
            rows.append(
                LabeledEmbedding(
                    embedding=_normalize(centroid + offsets[emotion] + noise),
                    speaker_id=spk,
                    utterance_id=f"{spk}_{emotion.abbreviation}_{k:02d}",
                    emotion=emotion,
                    sentence_id=config.sentences[k % len(config.sentences)],
                )
            )
    return rows


def gen_synthetic_corpus(config: SynthConfig, n_jobs: int = 1) -> list[LabeledEmbedding]:
    """
    Generates a labelled embedding corpus in which emotions shift every speaker's
    embedding by the same offset.

    Each utterance is normalize(c_s + d_e + noise) with a unit-length speaker
    centroid c_s, a shared emotion offset d_e (zero for Neutral) and fresh noise.
    Speaker k's generator is the k-th child of the root seed, so the corpus does not
    depend on `n_jobs`. Utterance k of a cell speaks sentence k (cyclically).

    :param config: Corpus shape and scales.
    :param n_jobs: joblib workers, one task per speaker.
    :return: Rows ordered by speaker, emotion, utterance.
    """
    root = np.random.SeedSequence(config.seed)
    offset_seq, *speaker_seqs = root.spawn(config.n_speakers + 1)
    offsets = emotion_offsets(config, np.random.default_rng(offset_seq))

    per_speaker = Parallel(n_jobs=n_jobs)(
        delayed(_speaker_rows)(index, seq, offsets, config)
        for index, seq in enumerate(speaker_seqs)
    )
    rows = [row for chunk in per_speaker for row in chunk]
    logger.info(
        "Generated %d synthetic rows: %d speakers x %d emotions x %d utterances (seed %d).",
        len(rows),
        config.n_speakers,
        len(config.emotions),
        config.utterances_per_cell,
        config.seed,
    )
    return rows
