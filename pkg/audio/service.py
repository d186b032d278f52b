import logging
import math
from pathlib import Path

import numpy as np

from audio.infrastructure.wav_codec import read_wav
from audio.models import NOMINAL_SAMPLE_RATE, AudioClip

logger = logging.getLogger(__name__)


def resampled_length(n_samples: int, source_rate: int, target_rate: int) -> int:
    """round(n * target / source) with halves rounded up."""
    return int(math.floor(n_samples * target_rate / source_rate + 0.5))


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    """
    Resamples a clip by linear interpolation.

    Output sample k sits at input position k * source_rate / target_rate; positions
    past the last input sample hold the last value. When the rates match the clip is
    returned unchanged.

    :param clip: Source audio.
    :param target_rate: Desired sample rate, positive.
    :return: Clip at `target_rate` with round(n * target / source) samples.
    """
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")

    if clip.sample_rate == target_rate:
        return clip

    n_out = resampled_length(clip.n_samples, clip.sample_rate, target_rate)
    positions = np.arange(n_out, dtype=np.float64) * (clip.sample_rate / target_rate)
    samples = np.interp(positions, np.arange(clip.n_samples, dtype=np.float64), clip.samples)

    logger.debug(
        "Resampled %s from %d Hz to %d Hz (%d -> %d samples)",
        clip.source_path,
        clip.sample_rate,
        target_rate,
        clip.n_samples,
        n_out,
    )
    return AudioClip(samples=samples, sample_rate=target_rate, source_path=clip.source_path)


def load_clip(path: str | Path, target_rate: int = NOMINAL_SAMPLE_RATE) -> AudioClip:
    """Reads a WAV file and brings it to the pipeline's nominal rate."""
    return resample(read_wav(path), target_rate)
