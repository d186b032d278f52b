import struct

import numpy as np
import pytest

from audio.infrastructure.wav_codec import (
    WaveFormat,
    decode_wav,
    encode_pcm16,
    read_wav,
    write_wav_pcm16,
)
from audio.models import AudioClip
from audio.service import load_clip, resample, resampled_length
from core.exceptions import EmptyAudioError, MalformedRiffError, UnsupportedEncodingError


def riff(format_tag: int, channels: int, rate: int, bits: int, data: bytes, extra=b"") -> bytes:
    """Builds a RIFF/WAVE payload with an optional chunk placed before `data`."""
    block_align = channels * bits // 8
    fmt = struct.pack("<HHIIHH", format_tag, channels, rate, rate * block_align, block_align, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + extra
    body += b"data" + struct.pack("<I", len(data)) + data
    return b"RIFF" + struct.pack("<I", len(body)) + body


@pytest.fixture
def pcm16_payload():
    """Mono PCM-16 file holding the samples 16384 and -16384."""
    return riff(WaveFormat.PCM, 1, 16000, 16, struct.pack("<hh", 16384, -16384))


def test_pcm16_scaled_by_32768(pcm16_payload):
    clip = decode_wav(pcm16_payload)

    assert clip.sample_rate == 16000
    np.testing.assert_array_equal(clip.samples, [0.5, -0.5])


def test_stereo_collapses_to_channel_mean():
    left, right = round(0.2 * 32768), round(0.6 * 32768)
    clip = decode_wav(riff(WaveFormat.PCM, 2, 8000, 16, struct.pack("<hh", left, right)))

    assert clip.n_samples == 1
    assert clip.samples[0] == pytest.approx((left + right) / 2 / 32768)
    assert clip.samples[0] == pytest.approx(0.4, abs=1e-4)


def test_pcm24_and_float32_decoding():
    pcm24 = (4194304).to_bytes(3, "little", signed=True) + (-8388608).to_bytes(
        3, "little", signed=True
    )
    clip24 = decode_wav(riff(WaveFormat.PCM, 1, 8000, 24, pcm24))
    np.testing.assert_array_equal(clip24.samples, [0.5, -1.0])

    clip32 = decode_wav(riff(WaveFormat.IEEE_FLOAT, 1, 8000, 32, struct.pack("<ff", 0.25, -0.75)))
    np.testing.assert_allclose(clip32.samples, [0.25, -0.75])


def test_unknown_chunks_are_skipped(pcm16_payload):
    extra = b"LIST" + struct.pack("<I", 3) + b"abc" + b"\x00"
    payload = riff(WaveFormat.PCM, 1, 16000, 16, struct.pack("<hh", 16384, -16384), extra=extra)

    np.testing.assert_array_equal(decode_wav(payload).samples, [0.5, -0.5])


def test_corrupted_magic_is_malformed(pcm16_payload):
    with pytest.raises(MalformedRiffError):
        decode_wav(b"RIFX" + pcm16_payload[4:])


def test_truncated_data_chunk_is_malformed(pcm16_payload):
    with pytest.raises(MalformedRiffError):
        decode_wav(pcm16_payload[:-2])


@pytest.mark.parametrize(
    "format_tag, bits, channels",
    [(0x0055, 16, 1), (WaveFormat.PCM, 8, 1), (WaveFormat.PCM, 16, 3)],
)
def test_unsupported_encodings(format_tag, bits, channels):
    block = channels * bits // 8
    with pytest.raises(UnsupportedEncodingError):
        decode_wav(riff(format_tag, channels, 8000, bits, b"\x00" * block * 2))


def test_empty_data_chunk():
    with pytest.raises(EmptyAudioError):
        decode_wav(riff(WaveFormat.PCM, 1, 8000, 16, b""))


def test_write_then_read_file(tmp_path):
    clip = AudioClip(samples=np.array([0.0, 0.25, -0.5, 0.75]), sample_rate=22050)
    path = write_wav_pcm16(clip, tmp_path / "clip.wav")

    read_back = read_wav(path)

    assert read_back.sample_rate == 22050
    assert read_back.source_path == str(path)
    np.testing.assert_array_equal(read_back.samples, clip.samples)


def test_encode_pcm16_stereo_frames():
    payload = encode_pcm16(np.array([[0.5, -0.5], [0.25, 0.25]]), 8000)

    np.testing.assert_array_equal(decode_wav(payload).samples, [0.0, 0.25])


def test_audio_clip_rejects_out_of_range_samples():
    with pytest.raises(ValueError):
        AudioClip(samples=np.array([0.0, 1.5]), sample_rate=8000)
    with pytest.raises(ValueError):
        AudioClip(samples=np.array([0.0]), sample_rate=0)


def test_resample_identity_returns_same_clip():
    clip = AudioClip(samples=np.linspace(-1, 1, 44100), sample_rate=22050)

    out = resample(clip, 22050)

    assert out is clip
    assert out.n_samples == 44100


def test_resample_upsampling_interpolates_midpoints():
    clip = AudioClip(samples=np.array([0.0, 1.0, 0.0, -1.0]), sample_rate=4)

    out = resample(clip, 8)

    assert out.sample_rate == 8
    np.testing.assert_allclose(out.samples, [0.0, 0.5, 1.0, 0.5, 0.0, -0.5, -1.0, -1.0])


def test_resample_downsampling_length_and_values():
    clip = AudioClip(samples=np.linspace(0.0, 0.9, 10), sample_rate=10)

    out = resample(clip, 5)

    assert out.n_samples == 5
    np.testing.assert_allclose(out.samples, [0.0, 0.2, 0.4, 0.6, 0.8])


@pytest.mark.parametrize(
    "n, source, target, expected",
    [(4, 4, 8, 8), (44100, 44100, 22050, 22050), (3, 2, 1, 2), (5, 3, 2, 3)],
)
def test_resampled_length_rounds_half_up(n, source, target, expected):
    assert resampled_length(n, source, target) == expected


def test_resample_rejects_non_positive_rate():
    clip = AudioClip(samples=np.zeros(4), sample_rate=4)
    with pytest.raises(ValueError):
        resample(clip, 0)


def test_load_clip_resamples_to_target(tmp_path):
    clip = AudioClip(samples=np.zeros(16000), sample_rate=16000)
    path = write_wav_pcm16(clip, tmp_path / "a.wav")

    loaded = load_clip(path, 22050)

    assert loaded.sample_rate == 22050
    assert loaded.n_samples == 22050
