"""PNG and binary PPM readers/writers."""

import numpy as np
import pytest

from wbrf.core import PixelMatrix
from wbrf.imageio import (
    decode_png,
    encode_png,
    read_image,
    read_ppm,
    write_image,
    write_ppm,
)


def random_quantized_image(rng, w=13, h=9) -> PixelMatrix:
    """An image whose values sit exactly on the 8-bit lattice."""
    return PixelMatrix.from_uint8(
        rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
    )


def test_ppm_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(10)
    img = random_quantized_image(rng)
    path = tmp_path / "img.ppm"
    write_ppm(path, img)
    back = read_ppm(path)
    assert (back.width, back.height) == (img.width, img.height)
    np.testing.assert_array_equal(back.channels, img.channels)


def test_ppm_header_comments_are_skipped(tmp_path):
    path = tmp_path / "c.ppm"
    raster = bytes([10, 20, 30, 40, 50, 60])
    path.write_bytes(b"P6\n# a comment\n2 1\n# another\n255\n" + raster)
    img = read_ppm(path)
    assert (img.width, img.height) == (2, 1)
    np.testing.assert_allclose(img.channels[:, 0] * 255, [10, 20, 30])


def test_ppm_rejects_wrong_magic(tmp_path):
    path = tmp_path / "bad.ppm"
    path.write_bytes(b"P5\n1 1\n255\n\x00")
    with pytest.raises(ValueError):
        read_ppm(path)


def test_ppm_rejects_nonstandard_maxval(tmp_path):
    path = tmp_path / "bad.ppm"
    path.write_bytes(b"P6\n1 1\n65535\n" + bytes(6))
    with pytest.raises(ValueError):
        read_ppm(path)


def test_ppm_rejects_truncated_raster(tmp_path):
    path = tmp_path / "short.ppm"
    path.write_bytes(b"P6\n2 2\n255\n" + bytes(5))
    with pytest.raises(ValueError):
        read_ppm(path)


def test_png_roundtrip_bit_exact():
    rng = np.random.default_rng(12)
    img = random_quantized_image(rng)
    back = decode_png(encode_png(img))
    np.testing.assert_array_equal(back.channels, img.channels)


def test_png_encoding_is_deterministic():
    rng = np.random.default_rng(14)
    img = random_quantized_image(rng)
    assert encode_png(img) == encode_png(img)


def test_read_write_dispatch_on_extension(tmp_path):
    rng = np.random.default_rng(16)
    img = random_quantized_image(rng)
    for name in ("a.png", "b.ppm", "c.pnm"):
        path = tmp_path / name
        write_image(path, img)
        back = read_image(path)
        np.testing.assert_array_equal(back.channels, img.channels)


def test_quantization_rounds_half_away_from_zero(tmp_path):
    # 128/255 stays 128 through a write/read cycle; a float just below a
    # half step rounds down, at the half step rounds up.
    img = PixelMatrix(np.array([[127.4], [127.5], [127.6]]) / 255.0,
                      width=1, height=1)
    path = tmp_path / "q.ppm"
    write_ppm(path, img)
    got = (read_ppm(path).channels * 255).round().astype(int)
    np.testing.assert_array_equal(got[:, 0], [127, 128, 128])
