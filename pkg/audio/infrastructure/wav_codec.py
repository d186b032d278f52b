"""
RIFF/WAVE reader and PCM-16 writer.

The reader walks the chunk list of a little-endian RIFF file, honours the `fmt `
and `data` chunks and skips everything else. Supported encodings are PCM-16,
PCM-24 and IEEE-float-32 with one or two channels; WAVE_FORMAT_EXTENSIBLE is
resolved to its sub-format first.
"""

import logging
import struct
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np

from audio.models import AudioClip
from core.exceptions import EmptyAudioError, MalformedRiffError, UnsupportedEncodingError

logger = logging.getLogger(__name__)

PCM16_SCALE = 32768.0
PCM24_SCALE = 8388608.0

# GUID tail shared by the KSDATAFORMAT_SUBTYPE_* identifiers
_EXTENSIBLE_GUID_TAIL = b"\x00\x00\x10\x00\x80\x00\x00\xaa\x00\x38\x9b\x71"


class WaveFormat(IntEnum):
    PCM = 0x0001
    IEEE_FLOAT = 0x0003
    EXTENSIBLE = 0xFFFE


@dataclass(frozen=True)
class FmtChunk:
    format_tag: int
    channels: int
    sample_rate: int
    block_align: int
    bits_per_sample: int


def _parse_fmt(body: bytes) -> FmtChunk:
    if len(body) < 16:
        raise MalformedRiffError(f"fmt chunk is {len(body)} bytes, needs at least 16")

    format_tag, channels, sample_rate, _byte_rate, block_align, bits = struct.unpack(
        "<HHIIHH", body[:16]
    )

    if format_tag == WaveFormat.EXTENSIBLE:
        if len(body) < 40:
            raise MalformedRiffError("WAVE_FORMAT_EXTENSIBLE fmt chunk is truncated")
        sub_format = body[24:40]
        if not sub_format.endswith(_EXTENSIBLE_GUID_TAIL):
            raise UnsupportedEncodingError("unknown WAVE_FORMAT_EXTENSIBLE sub-format GUID")
        format_tag = struct.unpack("<I", sub_format[:4])[0]

    return FmtChunk(format_tag, channels, sample_rate, block_align, bits)


def _check_encoding(fmt: FmtChunk) -> None:
    if fmt.format_tag == WaveFormat.PCM:
        if fmt.bits_per_sample not in (16, 24):
            raise UnsupportedEncodingError(f"{fmt.bits_per_sample}-bit PCM is not supported")
    elif fmt.format_tag == WaveFormat.IEEE_FLOAT:
        if fmt.bits_per_sample != 32:
            raise UnsupportedEncodingError(
                f"{fmt.bits_per_sample}-bit float is not supported, only 32-bit"
            )
    else:
        raise UnsupportedEncodingError(f"wave format tag {fmt.format_tag:#06x} is not supported")

    if fmt.channels not in (1, 2):
        raise UnsupportedEncodingError(f"{fmt.channels} channels, only mono and stereo are read")
    if fmt.sample_rate <= 0:
        raise MalformedRiffError("fmt chunk declares a zero sample rate")
    if fmt.block_align != fmt.channels * fmt.bits_per_sample // 8:
        raise MalformedRiffError(
            f"block align {fmt.block_align} does not match {fmt.channels} x {fmt.bits_per_sample} bits"
        )


def _decode_samples(data: bytes, fmt: FmtChunk) -> np.ndarray:
    """Decodes interleaved frames into a (frames, channels) float64 array in [-1, 1]."""
    n_frames = len(data) // fmt.block_align
    data = data[: n_frames * fmt.block_align]

    if fmt.format_tag == WaveFormat.IEEE_FLOAT:
        values = np.frombuffer(data, dtype="<f4").astype(np.float64)
        if not np.all(np.isfinite(values)):
            raise MalformedRiffError("float data contains non-finite samples")
        values = np.clip(values, -1.0, 1.0)
    elif fmt.bits_per_sample == 16:
        values = np.frombuffer(data, dtype="<i2").astype(np.float64) / PCM16_SCALE
    else:
        # 24-bit: place the three bytes in the top of an int32 and shift back down
        raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, 3)
        padded = np.zeros((raw.shape[0], 4), dtype=np.uint8)
        padded[:, 1:] = raw
        values = (padded.view("<i4").reshape(-1) >> 8).astype(np.float64) / PCM24_SCALE

    return values.reshape(n_frames, fmt.channels)


def decode_wav(payload: bytes, source_path: str = "") -> AudioClip:
    """
    Parses an in-memory RIFF/WAVE file.

    :param payload: Complete file content.
    :param source_path: Identifier stored on the returned clip.
    :return: Mono AudioClip at the file's own sample rate.
    :raises MalformedRiffError: Bad magic, inconsistent chunk sizes or missing chunks.
    :raises UnsupportedEncodingError: Compressed codecs, other bit depths, >2 channels.
    :raises EmptyAudioError: The data chunk holds zero samples.
    """
    if len(payload) < 12 or payload[:4] != b"RIFF" or payload[8:12] != b"WAVE":
        raise MalformedRiffError(f"{source_path or 'payload'}: missing RIFF/WAVE magic")

    riff_size = struct.unpack("<I", payload[4:8])[0]
    end = min(len(payload), 8 + riff_size)
    if riff_size < 4:
        raise MalformedRiffError(f"RIFF size {riff_size} is too small")

    fmt: FmtChunk | None = None
    data: bytes | None = None
    offset = 12

    while offset + 8 <= end:
        chunk_id = payload[offset : offset + 4]
        chunk_size = struct.unpack("<I", payload[offset + 4 : offset + 8])[0]
        body_start = offset + 8
        body_end = body_start + chunk_size

        if body_end > len(payload):
            if chunk_id == b"data":
                raise MalformedRiffError(
                    f"data chunk declares {chunk_size} bytes, only {len(payload) - body_start} present"
                )
            raise MalformedRiffError(f"chunk {chunk_id!r} runs past the end of the file")

        body = payload[body_start:body_end]
        if chunk_id == b"fmt ":
            fmt = _parse_fmt(body)
        elif chunk_id == b"data":
            data = body
        else:
            logger.debug("Skipping chunk %r (%d bytes) in %s", chunk_id, chunk_size, source_path)

        # chunks are word aligned
        offset = body_end + (chunk_size & 1)

    if fmt is None:
        raise MalformedRiffError(f"{source_path or 'payload'}: no fmt chunk")
    if data is None:
        raise MalformedRiffError(f"{source_path or 'payload'}: no data chunk")

    _check_encoding(fmt)

    frames = _decode_samples(data, fmt)
    if frames.shape[0] == 0:
        raise EmptyAudioError(f"{source_path or 'payload'}: data chunk holds no samples")

    mono = frames.mean(axis=1) if fmt.channels > 1 else frames[:, 0]
    return AudioClip(samples=mono, sample_rate=fmt.sample_rate, source_path=source_path)


def read_wav(path: str | Path) -> AudioClip:
    """
    Reads a WAV file into a normalized mono clip.

    :param path: File location.
    :return: AudioClip with integer samples scaled by the type's max magnitude and
        stereo collapsed to the per-sample channel mean.
    """
    path = Path(path)
    payload = path.read_bytes()
    clip = decode_wav(payload, source_path=str(path))
    logger.debug("Read %s: %d samples at %d Hz", path, clip.n_samples, clip.sample_rate)
    return clip


def encode_pcm16(samples: np.ndarray, sample_rate: int) -> bytes:
    """
    Encodes samples in [-1, 1] as a PCM-16 RIFF/WAVE byte string.

    A 2-D (frames, channels) array is written as interleaved multi-channel audio.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[:, None]
    channels = samples.shape[1]

    ints = np.clip(np.round(samples * PCM16_SCALE), -32768, 32767).astype("<i2")
    data = ints.tobytes()
    block_align = channels * 2

    fmt_body = struct.pack(
        "<HHIIHH",
        WaveFormat.PCM,
        channels,
        sample_rate,
        sample_rate * block_align,
        block_align,
        16,
    )
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt_body)) + fmt_body
    body += b"data" + struct.pack("<I", len(data)) + data
    if len(data) & 1:
        body += b"\x00"
    return b"RIFF" + struct.pack("<I", len(body)) + body


def write_wav_pcm16(clip: AudioClip, path: str | Path) -> Path:
    """
    Writes a clip as a mono PCM-16 WAV file.

    :return: The written path.
    """
    path = Path(path)
    path.write_bytes(encode_pcm16(clip.samples, clip.sample_rate))
    logger.debug("Wrote %s: %d samples at %d Hz", path, clip.n_samples, clip.sample_rate)
    return path
