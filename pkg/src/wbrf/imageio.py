"""8-bit image file I/O: PNG (via Pillow) and binary PPM (P6).

PPM is the bit-exact golden format for tests; PNG is the user-facing
format. Both ingest by dividing by 255 and write by rounding half away
from zero, matching the core [0, 1] convention.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .core import PixelMatrix


def read_image(path) -> PixelMatrix:
    path = Path(path)
    if path.suffix.lower() in (".ppm", ".pnm"):
        return read_ppm(path)
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"))
    return PixelMatrix.from_uint8(arr)


def write_image(path, img: PixelMatrix) -> None:
    path = Path(path)
    if path.suffix.lower() in (".ppm", ".pnm"):
        write_ppm(path, img)
        return
    path.write_bytes(encode_png(img))


def encode_png(img: PixelMatrix) -> bytes:
    """Deterministic PNG bytes for an image."""
    buf = io.BytesIO()
    Image.fromarray(img.to_uint8(), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def decode_png(data: bytes) -> PixelMatrix:
    with Image.open(io.BytesIO(data)) as im:
        arr = np.asarray(im.convert("RGB"))
    return PixelMatrix.from_uint8(arr)


def read_ppm(path) -> PixelMatrix:
    data = Path(path).read_bytes()
    fields = []
    pos = 0
    # Header: magic, width, height, maxval; '#' comments run to end of line.
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PPM header")
        fields.append(data[start:pos])
    if fields[0] != b"P6":
        raise ValueError(f"{path}: not a binary PPM (P6) file")
    width, height, maxval = (int(f) for f in fields[1:])
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 supported, got {maxval}")
    pos += 1  # single whitespace after maxval
    raster = data[pos : pos + width * height * 3]
    if len(raster) != width * height * 3:
        raise ValueError(f"{path}: truncated PPM raster")
    arr = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)
    return PixelMatrix.from_uint8(arr)


def write_ppm(path, img: PixelMatrix) -> None:
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.to_uint8().tobytes())
