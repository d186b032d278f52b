"""
SVM1 model container (little-endian).

    magic "SVM1", u8 kind (1 = binary, 2 = one-vs-one), u32 dim
    binary body:  f64 gamma, f64 bias, u32 n_sv, n_sv f64 dual coefficients,
                  n_sv * dim f32 support vectors
    one-vs-one:   u32 n_classes, per class u16-length-prefixed UTF-8 label,
                  u32 n_pairs, per pair u16 i, u16 j and a binary body
"""

import logging
import struct
from pathlib import Path

import numpy as np

from core.exceptions import BadMagicError, DimMismatchError, TruncatedFileError
from svm.models import BinarySvmModel, MulticlassSvmModel

logger = logging.getLogger(__name__)

SVM1_MAGIC = b"SVM1"
KIND_BINARY = 1
KIND_MULTICLASS = 2

_HEADER = struct.Struct("<4sBI")
_BODY_HEAD = struct.Struct("<ddI")
_U32 = struct.Struct("<I")
_U16 = struct.Struct("<H")
_PAIR = struct.Struct("<HH")


def _encode_body(model: BinarySvmModel) -> bytes:
    return (
        _BODY_HEAD.pack(model.gamma, model.bias, model.n_support)
        + model.dual_coefs.astype("<f8").tobytes()
        + model.support_vectors.astype("<f4").tobytes()
    )


def encode_model(model: BinarySvmModel | MulticlassSvmModel) -> bytes:
    if isinstance(model, BinarySvmModel):
        return _HEADER.pack(SVM1_MAGIC, KIND_BINARY, model.dim) + _encode_body(model)

    parts = [_HEADER.pack(SVM1_MAGIC, KIND_MULTICLASS, model.dim), _U32.pack(model.n_classes)]
    for label in model.classes:
        raw = str(label).encode("utf-8")
        parts.append(_U16.pack(len(raw)) + raw)
    parts.append(_U32.pack(len(model.pairwise_models)))
    for (i, j), pair_model in sorted(model.pairwise_models.items()):
        if pair_model.dim != model.dim:
            raise DimMismatchError(model.dim, pair_model.dim)
        parts.append(_PAIR.pack(i, j) + _encode_body(pair_model))
    return b"".join(parts)


class _Cursor:
    def __init__(self, payload: bytes):
        self.payload = payload
        self.offset = 0

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.payload):
            raise TruncatedFileError(f"SVM1 data ends at {len(self.payload)}, needed {self.offset + n}")
        chunk = self.payload[self.offset : self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt: struct.Struct) -> tuple:
        return fmt.unpack(self.take(fmt.size))


def _decode_body(cursor: _Cursor, dim: int) -> BinarySvmModel:
    gamma, bias, n_sv = cursor.unpack(_BODY_HEAD)
    coefs = np.frombuffer(cursor.take(8 * n_sv), dtype="<f8").astype(np.float64)
    svs = np.frombuffer(cursor.take(4 * n_sv * dim), dtype="<f4").astype(np.float64)
    return BinarySvmModel(
        support_vectors=svs.reshape(n_sv, dim), dual_coefs=coefs, bias=bias, gamma=gamma
    )


def decode_model(payload: bytes) -> BinarySvmModel | MulticlassSvmModel:
    """
    :raises BadMagicError: Not an SVM1 container.
    :raises TruncatedFileError: Payload shorter than declared.
    """
    if payload[:4] != SVM1_MAGIC:
        raise BadMagicError(f"expected magic {SVM1_MAGIC!r}, found {payload[:4]!r}")
    cursor = _Cursor(payload)
    _, kind, dim = cursor.unpack(_HEADER)

    if kind == KIND_BINARY:
        return _decode_body(cursor, dim)
    if kind != KIND_MULTICLASS:
        raise BadMagicError(f"unknown SVM1 model kind {kind}")

    (n_classes,) = cursor.unpack(_U32)
    classes = []
    for _ in range(n_classes):
        (length,) = cursor.unpack(_U16)
        classes.append(cursor.take(length).decode("utf-8"))

    (n_pairs,) = cursor.unpack(_U32)
    pairs = {}
    for _ in range(n_pairs):
        i, j = cursor.unpack(_PAIR)
        pairs[(i, j)] = _decode_body(cursor, dim)
    return MulticlassSvmModel(classes=tuple(classes), pairwise_models=pairs)


def save_model(model: BinarySvmModel | MulticlassSvmModel, path: str | Path) -> Path:
    path = Path(path)
    path.write_bytes(encode_model(model))
    logger.debug("Saved SVM model to %s", path)
    return path


def load_model(path: str | Path) -> BinarySvmModel | MulticlassSvmModel:
    path = Path(path)
    model = decode_model(path.read_bytes())
    logger.debug("Loaded SVM model from %s", path)
    return model
