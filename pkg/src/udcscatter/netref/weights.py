"""Weight containers, seeded initialization and the binary weight bundle.

Bundle layout (all integers little-endian uint32):

    b"UDCW" | version | len(config_json) | config_json (UTF-8) | n_tensors
    then per tensor: len(name) | name (UTF-8) | ndim | dims... | float32 LE data

Tensor names are dotted paths into the weight dataclasses, e.g.
``scatter_levels.0.1.csa.q.w``.
"""
import dataclasses
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np

from ..errors import ImageFormatError

MAGIC = b"UDCW"
VERSION = 1


@dataclass
class Pointwise:
    w: np.ndarray  # (C_in, C_out)
    b: np.ndarray  # (C_out,)


@dataclass
class Depthwise:
    w: np.ndarray  # (3, 3, C)
    b: np.ndarray  # (C,)


@dataclass
class Conv3:
    w: np.ndarray  # (3, 3, C_in, C_out)
    b: np.ndarray  # (C_out,)


@dataclass
class Norm:
    g: np.ndarray
    b: np.ndarray


@dataclass
class CsaWeights:
    norm: Norm
    q: Pointwise
    k: Pointwise
    v: Pointwise
    q_dw: Optional[Depthwise] = None
    k_dw: Optional[Depthwise] = None
    v_dw: Optional[Depthwise] = None


@dataclass
class FfnWeights:
    norm: Norm
    expand: Pointwise
    contract: Pointwise


@dataclass
class TsabWeights:
    csa: CsaWeights
    ffn: FfnWeights


@dataclass
class GcabWeights:
    conv: Conv3
    pw1: Pointwise
    dw: Depthwise
    pw2: Pointwise
    ca_down: Pointwise
    ca_up: Pointwise


@dataclass
class FfbWeights:
    v1: Pointwise
    v2: Pointwise
    w1: Pointwise
    w2: Pointwise


@dataclass
class HeadWeights:
    w1: np.ndarray  # (hidden, C)
    w2: np.ndarray  # (2, hidden)


@dataclass
class SrudcWeights:
    scatter_in: Conv3
    scatter_levels: List[List[TsabWeights]]
    scatter_down: List[Conv3]
    head: HeadWeights
    image_in: Conv3
    encoder: List[List[GcabWeights]]
    image_down: List[Conv3]
    ffb: List[FfbWeights]
    fuse: List[Pointwise]
    decoder: List[List[GcabWeights]]
    up: List[Pointwise]
    image_out: Conv3


# -- initialization ----------------------------------------------------------

class Initializer:
    """Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], rounded to float32."""

    def __init__(self, seed):
        self.rng = np.random.default_rng(seed)

    def uniform(self, shape, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        return self.rng.uniform(-bound, bound, size=shape).astype(np.float32).astype(np.float64)

    def pointwise(self, cin, cout):
        return Pointwise(self.uniform((cin, cout), cin), self.uniform((cout,), cin))

    def depthwise(self, c):
        return Depthwise(self.uniform((3, 3, c), 9), self.uniform((c,), 9))

    def conv3(self, cin, cout):
        return Conv3(self.uniform((3, 3, cin, cout), 9 * cin), self.uniform((cout,), 9 * cin))

    def norm(self, c):
        return Norm(np.ones(c), np.zeros(c))

    def csa(self, c, qkv_depthwise=False):
        dw = (lambda: self.depthwise(c)) if qkv_depthwise else (lambda: None)
        return CsaWeights(
            self.norm(c), self.pointwise(c, c), self.pointwise(c, c), self.pointwise(c, c),
            dw(), dw(), dw(),
        )

    def ffn(self, c, ratio=2):
        return FfnWeights(self.norm(c), self.pointwise(c, ratio * c), self.pointwise(ratio * c, c))

    def tsab(self, c, qkv_depthwise=False):
        return TsabWeights(self.csa(c, qkv_depthwise), self.ffn(c))

    def gcab(self, c, reduction=4):
        cr = max(1, c // reduction)
        return GcabWeights(
            self.conv3(c, c), self.pointwise(c, c), self.depthwise(c), self.pointwise(c, c),
            self.pointwise(c, cr), self.pointwise(cr, c),
        )

    def ffb(self, cu, cf):
        return FfbWeights(
            self.pointwise(cu, cf), self.pointwise(cf, cf),
            self.pointwise(cu, cf), self.pointwise(cf, cf),
        )

    def head(self, c, hidden=None):
        hidden = hidden or c
        return HeadWeights(self.uniform((hidden, c), c), self.uniform((2, hidden), hidden))


def zeros_like(weights):
    """Copy of a weight tree with every tensor zeroed (norm gains kept at 1)."""
    def visit(obj):
        if isinstance(obj, Norm):
            return Norm(np.ones_like(obj.g), np.zeros_like(obj.b))
        if dataclasses.is_dataclass(obj):
            return type(obj)(**{f.name: visit(getattr(obj, f.name)) for f in dataclasses.fields(obj)})
        if isinstance(obj, list):
            return [visit(o) for o in obj]
        if isinstance(obj, np.ndarray):
            return np.zeros_like(obj)
        return obj
    return visit(weights)


# -- flattening and bundles --------------------------------------------------

def flatten(obj, prefix=""):
    """Ordered dict of dotted name -> tensor for a weight tree."""
    out = {}
    if isinstance(obj, np.ndarray):
        out[prefix] = obj
    elif dataclasses.is_dataclass(obj):
        for f in dataclasses.fields(obj):
            child = getattr(obj, f.name)
            if child is not None:
                out.update(flatten(child, f"{prefix}.{f.name}" if prefix else f.name))
    elif isinstance(obj, list):
        for i, child in enumerate(obj):
            out.update(flatten(child, f"{prefix}.{i}" if prefix else str(i)))
    return out


def unflatten(template, flat, prefix=""):
    """Rebuild ``template``'s tree with tensors taken from ``flat``."""
    if isinstance(template, np.ndarray):
        if prefix not in flat:
            raise KeyError(f"missing tensor {prefix!r}")
        arr = np.asarray(flat[prefix], dtype=np.float64)
        if arr.shape != template.shape:
            raise ValueError(f"tensor {prefix!r} has shape {arr.shape}, expected {template.shape}")
        return arr
    if dataclasses.is_dataclass(template):
        kwargs = {}
        for f in dataclasses.fields(template):
            child = getattr(template, f.name)
            name = f"{prefix}.{f.name}" if prefix else f.name
            kwargs[f.name] = None if child is None else unflatten(child, flat, name)
        return type(template)(**kwargs)
    if isinstance(template, list):
        return [unflatten(c, flat, f"{prefix}.{i}" if prefix else str(i)) for i, c in enumerate(template)]
    return template


def encode_bundle(flat, config):
    cfg = json.dumps(config, sort_keys=True).encode("utf-8")
    parts = [MAGIC, struct.pack("<II", VERSION, len(cfg)), cfg, struct.pack("<I", len(flat))]
    for name, arr in flat.items():
        raw = name.encode("utf-8")
        arr = np.asarray(arr)
        parts.append(struct.pack("<I", len(raw)) + raw)
        parts.append(struct.pack("<I", arr.ndim) + struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    return b"".join(parts)


def decode_bundle(data):
    """Inverse of :func:`encode_bundle`; returns ``(flat, config)``."""
    pos = 0

    def take(n):
        nonlocal pos
        if pos + n > len(data):
            raise ImageFormatError("truncated weight bundle", pos)
        chunk = data[pos:pos + n]
        pos += n
        return chunk

    if take(4) != MAGIC:
        raise ImageFormatError("bad weight bundle magic", 0)
    version, cfg_len = struct.unpack("<II", take(8))
    if version != VERSION:
        raise ImageFormatError(f"unsupported bundle version {version}", 4)
    config = json.loads(take(cfg_len).decode("utf-8"))
    (count,) = struct.unpack("<I", take(4))
    flat = {}
    for _ in range(count):
        (nlen,) = struct.unpack("<I", take(4))
        name = take(nlen).decode("utf-8")
        (ndim,) = struct.unpack("<I", take(4))
        dims = struct.unpack(f"<{ndim}I", take(4 * ndim))
        size = int(np.prod(dims, dtype=np.int64))
        flat[name] = np.frombuffer(take(4 * size), dtype="<f4").reshape(dims).astype(np.float64)
    return flat, config


def save_bundle(path, flat, config):
    Path(path).write_bytes(encode_bundle(flat, config))


def load_bundle(path):
    return decode_bundle(Path(path).read_bytes())
