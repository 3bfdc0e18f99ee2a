"""PFM, PPM (P6) and PNG readers and writers.

Only the subsets needed here are supported: 32-bit float PFM (``PF`` colour
and ``Pf`` single channel), binary PPM with maxval 255, and 8-bit
non-interlaced PNG (greyscale, RGB or RGBA; alpha is dropped on read).
Writers always emit RGB. Parse failures raise :class:`ImageFormatError`
with the offending byte offset.
"""
import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import ImageFormatError

FORMATS = ("pfm", "ppm", "png")
PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def format_from_path(path):
    ext = Path(path).suffix.lower().lstrip(".")
    if ext not in FORMATS:
        raise ValueError(f"cannot infer image format from {str(path)!r}")
    return ext


def _header_tokens(data, count, start=0):
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments.

    Returns the tokens with their offsets and the offset just past the single
    whitespace byte that terminates the last token.
    """
    tokens = []
    pos = start
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        if pos >= n:
            raise ImageFormatError("unexpected end of header", pos)
        begin = pos
        while pos < n and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append((data[begin:pos], begin))
    if pos >= n:
        raise ImageFormatError("header not terminated", pos)
    return tokens, pos + 1


def _int_token(tok, what):
    raw, off = tok
    try:
        value = int(raw)
    except ValueError:
        raise ImageFormatError(f"bad {what} {raw!r}", off) from None
    if value < 1:
        raise ImageFormatError(f"{what} must be positive", off)
    return value


# -- PFM ---------------------------------------------------------------------

def parse_pfm(data):
    """Decode PFM bytes to an (H, W, C) float32 array, top row first."""
    if data[:2] not in (b"PF", b"Pf"):
        raise ImageFormatError("missing PF/Pf magic", 0)
    channels = 3 if data[:2] == b"PF" else 1
    tokens, pos = _header_tokens(data, 4)
    if tokens[0][0] not in (b"PF", b"Pf"):
        raise ImageFormatError("missing PF/Pf magic", 0)
    width = _int_token(tokens[1], "width")
    height = _int_token(tokens[2], "height")
    raw, off = tokens[3]
    try:
        scale = float(raw)
    except ValueError:
        raise ImageFormatError(f"bad scale {raw!r}", off) from None
    if scale == 0:
        raise ImageFormatError("scale must be nonzero", off)
    dtype = "<f4" if scale < 0 else ">f4"
    nbytes = width * height * channels * 4
    payload = data[pos:pos + nbytes]
    if len(payload) < nbytes:
        raise ImageFormatError(
            f"truncated payload: expected {nbytes} bytes, found {len(payload)}",
            pos + len(payload),
        )
    arr = np.frombuffer(payload, dtype=dtype).reshape(height, width, channels)
    return arr[::-1].astype(np.float32)


def encode_pfm(arr):
    arr = np.asarray(arr)
    if arr.ndim == 2:
        arr = arr[..., None]
    height, width, channels = arr.shape
    if channels not in (1, 3):
        raise ValueError("PFM supports 1 or 3 channels")
    magic = b"PF" if channels == 3 else b"Pf"
    header = magic + b"\n%d %d\n-1.0\n" % (width, height)
    return header + np.ascontiguousarray(arr[::-1], dtype="<f4").tobytes()


# -- PPM ---------------------------------------------------------------------

def parse_ppm(data):
    """Decode binary P6 bytes to an (H, W, 3) uint8 array."""
    if data[:2] != b"P6":
        raise ImageFormatError("missing P6 magic", 0)
    tokens, pos = _header_tokens(data, 4)
    width = _int_token(tokens[1], "width")
    height = _int_token(tokens[2], "height")
    maxval = _int_token(tokens[3], "maxval")
    if maxval != 255:
        raise ImageFormatError("only maxval 255 is supported", tokens[3][1])
    nbytes = width * height * 3
    payload = data[pos:pos + nbytes]
    if len(payload) < nbytes:
        raise ImageFormatError(
            f"truncated payload: expected {nbytes} bytes, found {len(payload)}",
            pos + len(payload),
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3).copy()


def encode_ppm(arr8):
    arr8 = np.asarray(arr8, dtype=np.uint8)
    height, width, _ = arr8.shape
    return b"P6\n%d %d\n255\n" % (width, height) + np.ascontiguousarray(arr8).tobytes()


# -- PNG ---------------------------------------------------------------------

def _paeth(a, b, c):
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    return b if pb <= pc else c


def _unfilter(raw, height, stride, bpp, offset):
    out = np.zeros((height, stride), dtype=np.uint8)
    prev = np.zeros(stride, dtype=np.int64)
    pos = 0
    for y in range(height):
        ftype = raw[pos]
        line = np.frombuffer(raw, dtype=np.uint8, count=stride, offset=pos + 1).astype(np.int64)
        pos += stride + 1
        if ftype == 0:
            cur = line
        elif ftype == 1:
            cur = line.copy()
            for c in range(bpp):
                cur[c::bpp] = np.cumsum(line[c::bpp]) % 256
        elif ftype == 2:
            cur = (line + prev) % 256
        elif ftype in (3, 4):
            cur = line.copy()
            for x in range(stride):
                a = int(cur[x - bpp]) if x >= bpp else 0
                b = int(prev[x])
                if ftype == 3:
                    pred = (a + b) // 2
                else:
                    c = int(prev[x - bpp]) if x >= bpp else 0
                    pred = _paeth(a, b, c)
                cur[x] = (int(line[x]) + pred) % 256
        else:
            raise ImageFormatError(f"bad PNG filter type {ftype} on row {y}", offset)
        out[y] = cur
        prev = cur
    return out


def parse_png(data):
    """Decode 8-bit PNG bytes to an (H, W, 3) uint8 array."""
    if data[:8] != PNG_SIGNATURE:
        raise ImageFormatError("missing PNG signature", 0)
    pos = 8
    header = None
    idat = []
    idat_offset = None
    while True:
        if pos + 8 > len(data):
            raise ImageFormatError("truncated chunk header", pos)
        length, ctype = struct.unpack(">I4s", data[pos:pos + 8])
        body = data[pos + 8:pos + 8 + length]
        if len(body) < length or pos + 12 + length > len(data):
            raise ImageFormatError(f"truncated {ctype!r} chunk", pos)
        (crc,) = struct.unpack(">I", data[pos + 8 + length:pos + 12 + length])
        if zlib.crc32(ctype + body) & 0xFFFFFFFF != crc:
            raise ImageFormatError(f"CRC mismatch in {ctype!r} chunk", pos)
        if ctype == b"IHDR":
            header = struct.unpack(">IIBBBBB", body)
        elif ctype == b"IDAT":
            if idat_offset is None:
                idat_offset = pos
            idat.append(body)
        elif ctype == b"IEND":
            break
        pos += 12 + length
    if header is None:
        raise ImageFormatError("missing IHDR chunk", 8)
    width, height, depth, ctype, _comp, _filt, interlace = header
    channels = {0: 1, 2: 3, 6: 4}.get(ctype)
    if depth != 8 or channels is None or interlace != 0:
        raise ImageFormatError(
            f"unsupported PNG (bit depth {depth}, colour type {ctype}, interlace {interlace})",
            16,
        )
    if idat_offset is None:
        raise ImageFormatError("missing IDAT chunk", pos)
    try:
        raw = zlib.decompress(b"".join(idat))
    except zlib.error as exc:
        raise ImageFormatError(f"corrupt image data: {exc}", idat_offset) from None
    stride = width * channels
    if len(raw) < height * (stride + 1):
        raise ImageFormatError("truncated image data", idat_offset)
    pixels = _unfilter(raw, height, stride, channels, idat_offset)
    pixels = pixels.reshape(height, width, channels)
    if channels == 1:
        return np.repeat(pixels, 3, axis=2)
    return pixels[..., :3].copy()


def _chunk(ctype, body):
    return (
        struct.pack(">I", len(body))
        + ctype
        + body
        + struct.pack(">I", zlib.crc32(ctype + body) & 0xFFFFFFFF)
    )


def encode_png(arr8):
    arr8 = np.ascontiguousarray(arr8, dtype=np.uint8)
    height, width, _ = arr8.shape
    rows = np.zeros((height, width * 3 + 1), dtype=np.uint8)
    rows[:, 1:] = arr8.reshape(height, width * 3)
    ihdr = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    return (
        PNG_SIGNATURE
        + _chunk(b"IHDR", ihdr)
        + _chunk(b"IDAT", zlib.compress(rows.tobytes(), 6))
        + _chunk(b"IEND", b"")
    )


# -- public API --------------------------------------------------------------

def to_uint8(img):
    """Quantize [0, 1] values to bytes, rounding half away from zero."""
    img = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    return np.floor(img * 255.0 + 0.5).astype(np.uint8)


def read_image(path, format=None):
    """Read an image as an (H, W, 3) float64 array.

    PFM values are returned exactly; 8-bit formats are scaled to [0, 1].
    """
    fmt = format or format_from_path(path)
    data = Path(path).read_bytes()
    if fmt == "pfm":
        arr = parse_pfm(data)
        if arr.shape[2] == 1:
            arr = np.repeat(arr, 3, axis=2)
        return arr.astype(np.float64)
    if fmt == "ppm":
        return parse_ppm(data) / 255.0
    if fmt == "png":
        return parse_png(data) / 255.0
    raise ValueError(f"unknown format {fmt!r}")


def write_image(img, path, format=None):
    """Write an (H, W, 3) image.

    PFM stores float32; PPM and PNG quantize to 8 bits (values are clipped
    to [0, 1] first).
    """
    fmt = format or format_from_path(path)
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {img.shape}")
    if fmt == "pfm":
        payload = encode_pfm(img)
    elif fmt == "ppm":
        payload = encode_ppm(to_uint8(img))
    elif fmt == "png":
        payload = encode_png(to_uint8(img))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    Path(path).write_bytes(payload)
