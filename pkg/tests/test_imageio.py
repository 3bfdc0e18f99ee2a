import struct
import zlib

import numpy as np
import pytest

from udcscatter.errors import ImageFormatError
from udcscatter.imageio import (
    encode_pfm,
    encode_png,
    parse_pfm,
    parse_png,
    parse_ppm,
    read_image,
    to_uint8,
    write_image,
)
from udcscatter.scenes import random_hdr_scene


def test_pfm_round_trip_bitwise(tmp_path):
    img = random_hdr_scene(3, 17, 23, highlights=2).astype(np.float32)
    write_image(img, tmp_path / "x.pfm")
    back = read_image(tmp_path / "x.pfm")
    assert back.dtype == np.float64
    assert back.astype(np.float32).tobytes() == img.tobytes()


def test_pfm_layout():
    img = np.arange(2 * 3 * 3, dtype=np.float32).reshape(2, 3, 3)
    data = encode_pfm(img)
    assert data.startswith(b"PF\n3 2\n-1.0\n")
    # rows are stored bottom-up, little-endian
    first = struct.unpack("<3f", data[len(b"PF\n3 2\n-1.0\n"):][:12])
    assert first == tuple(img[1, 0])


def test_pfm_big_endian_and_grey():
    body = np.array([[1.5, -2.0]], dtype=">f4").tobytes()
    arr = parse_pfm(b"Pf\n2 1\n1.0\n" + body)
    assert arr.shape == (1, 2, 1)
    assert arr[0, :, 0].tolist() == [1.5, -2.0]


def test_pfm_truncated():
    with pytest.raises(ImageFormatError) as exc:
        parse_pfm(b"PF\n2 2\n-1.0\n" + b"\0" * 40)
    assert exc.value.offset == len(b"PF\n2 2\n-1.0\n") + 40


def test_ppm_example():
    payload = bytes(range(12))
    arr = parse_ppm(b"P6 2 2 255\n" + payload)
    assert arr.shape == (2, 2, 3)
    assert arr.ravel().tolist() == list(range(12))


def test_ppm_short_payload():
    with pytest.raises(ImageFormatError) as exc:
        parse_ppm(b"P6 2 2 255\n" + bytes(11))
    assert exc.value.offset == 11 + 11
    assert "at byte" in str(exc.value)


def test_ppm_header_comments_and_errors():
    arr = parse_ppm(b"P6\n# made by hand\n1 1\n255\n\x01\x02\x03")
    assert arr.tolist() == [[[1, 2, 3]]]
    with pytest.raises(ImageFormatError):
        parse_ppm(b"P6 1 1 65535\n" + bytes(6))
    with pytest.raises(ImageFormatError):
        parse_ppm(b"P3 1 1 255\n1 2 3")
    with pytest.raises(ImageFormatError):
        parse_ppm(b"P6 x 1 255\n" + bytes(3))


def test_ldr_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    img = rng.integers(0, 256, size=(9, 13, 3)) / 255.0
    for ext in ("png", "ppm"):
        write_image(img, tmp_path / f"a.{ext}")
        assert np.array_equal(read_image(tmp_path / f"a.{ext}"), img)


def test_to_uint8_rounding():
    assert to_uint8(np.array([0.5, 1.7, -1.0, 1 / 255])).tolist() == [128, 255, 0, 1]


def _png(width, height, ctype, rows):
    def chunk(t, body):
        return struct.pack(">I", len(body)) + t + body + struct.pack(">I", zlib.crc32(t + body))

    ihdr = struct.pack(">IIBBBBB", width, height, 8, ctype, 0, 0, 0)
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", ihdr)
        + chunk(b"IDAT", zlib.compress(b"".join(rows)))
        + chunk(b"IEND", b"")
    )


def _paeth(a, b, c):
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    return b if pb <= pc else c


def _filter_row(ftype, cur, prev, bpp):
    out = bytearray()
    for x, v in enumerate(cur):
        a = cur[x - bpp] if x >= bpp else 0
        b = prev[x]
        c = prev[x - bpp] if x >= bpp else 0
        pred = [0, a, b, (a + b) // 2, _paeth(a, b, c)][ftype]
        out.append((v - pred) % 256)
    return bytes([ftype]) + bytes(out)


@pytest.mark.parametrize("ctype, channels", [(0, 1), (2, 3), (6, 4)])
def test_png_all_filters(ctype, channels):
    rng = np.random.default_rng(ctype)
    h, w = 10, 7
    pix = rng.integers(0, 256, size=(h, w, channels), dtype=np.uint8)
    rows, prev = [], [0] * (w * channels)
    for y in range(h):
        cur = pix[y].ravel().tolist()
        rows.append(_filter_row(y % 5, cur, prev, channels))
        prev = cur
    arr = parse_png(_png(w, h, ctype, rows))
    expected = np.repeat(pix, 3, axis=2) if channels == 1 else pix[..., :3]
    assert np.array_equal(arr, expected)


def test_png_writer_round_trip():
    pix = np.random.default_rng(5).integers(0, 256, size=(6, 5, 3), dtype=np.uint8)
    assert np.array_equal(parse_png(encode_png(pix)), pix)


def test_png_corruption_detected():
    data = bytearray(encode_png(np.zeros((2, 2, 3), dtype=np.uint8)))
    data[20] ^= 0xFF
    with pytest.raises(ImageFormatError, match="CRC"):
        parse_png(bytes(data))
    with pytest.raises(ImageFormatError):
        parse_png(b"not a png")
    with pytest.raises(ImageFormatError):
        parse_png(encode_png(np.zeros((2, 2, 3), dtype=np.uint8))[:30])


def test_unknown_extension(tmp_path):
    with pytest.raises(ValueError):
        write_image(np.zeros((1, 1, 3)), tmp_path / "x.jpg")
    with pytest.raises(ValueError):
        write_image(np.zeros((1, 1)), tmp_path / "x.pfm")
