"""WBRF model file format.

Layout (all integers little-endian):

    magic   4 bytes  b"WBRF"
    version u32
    hlen    u32      length of the JSON header
    header  hlen bytes, UTF-8 JSON: {"k", "layout", "estimator"}
    payload k*3 + k*33*3 float64 LE: centers then rectification
            matrices, cluster-major (row-major within each 33x3)
    crc     u32      CRC32 of everything above

The header JSON is written with sorted keys and fixed separators so
identical models produce identical bytes.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .core import KERNEL_LAYOUT
from .errors import CorruptFile, FormatVersionMismatch
from .estimators import EstimatorConfig
from .training import MODEL_FORMAT_VERSION, ModelMeta, RectificationModel

MAGIC = b"WBRF"


def model_to_bytes(model: RectificationModel) -> bytes:
    header = json.dumps(
        {
            "k": model.k,
            "layout": model.meta.layout,
            "estimator": model.meta.estimator.to_dict(),
        },
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<I", model.meta.version),
        struct.pack("<I", len(header)),
        header,
        model.centers.astype("<f8").tobytes(),
        model.rects.astype("<f8").tobytes(),
    ]
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def model_from_bytes(data: bytes) -> RectificationModel:
    if len(data) < 12 or data[:4] != MAGIC:
        raise CorruptFile("not a WBRF model file")
    body, crc_bytes = data[:-4], data[-4:]
    if struct.unpack("<I", crc_bytes)[0] != zlib.crc32(body):
        raise CorruptFile("checksum mismatch")
    version = struct.unpack("<I", data[4:8])[0]
    if version != MODEL_FORMAT_VERSION:
        raise FormatVersionMismatch(f"unsupported format version {version}")
    hlen = struct.unpack("<I", data[8:12])[0]
    if 12 + hlen > len(body):
        raise CorruptFile("truncated header")
    try:
        header = json.loads(data[12 : 12 + hlen].decode("utf-8"))
        k = int(header["k"])
        layout = header["layout"]
        estimator = EstimatorConfig.from_dict(header["estimator"])
    except (ValueError, KeyError, UnicodeDecodeError) as exc:
        raise CorruptFile(f"malformed header: {exc}") from exc
    if layout != KERNEL_LAYOUT:
        raise FormatVersionMismatch(
            f"kernel layout {layout!r} does not match {KERNEL_LAYOUT!r}"
        )
    offset = 12 + hlen
    n_center = k * 3
    n_rect = k * 33 * 3
    expected = offset + (n_center + n_rect) * 8
    if len(body) != expected:
        raise CorruptFile(
            f"payload size {len(body) - offset} != expected {(n_center + n_rect) * 8}"
        )
    centers = np.frombuffer(body, dtype="<f8", count=n_center, offset=offset)
    rects = np.frombuffer(body, dtype="<f8", count=n_rect,
                          offset=offset + n_center * 8)
    return RectificationModel(
        centers=centers.reshape(k, 3).astype(np.float64),
        rects=rects.reshape(k, 33, 3).astype(np.float64),
        meta=ModelMeta(estimator=estimator, layout=layout, version=version),
    )


def save_model(model: RectificationModel, path) -> None:
    Path(path).write_bytes(model_to_bytes(model))


def load_model(path) -> RectificationModel:
    return model_from_bytes(Path(path).read_bytes())
