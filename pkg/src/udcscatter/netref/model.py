"""Two-branch restoration network assembled from the reference blocks.

The scattering branch (3x3 conv, three TSAB levels with stride-2 downscales)
yields features U1..U3 and the (alpha, m) head. The image branch is a
three-level GCAB U-net; at every level the encoder feature is modulated by
an FFB driven by the matching U and concatenated with the decoder stream.
"""
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np

from .blocks import ffb_forward, gcab_forward, head_forward, tsab_forward
from .layers import conv3x3, pointwise, upsample2x
from .weights import Initializer, SrudcWeights, flatten, load_bundle, save_bundle, unflatten

FULL_WIDTHS = (24, 48, 96)
LIGHT_WIDTHS = (16, 32, 64)


@dataclass(frozen=True)
class NetConfig:
    """``gcab_count`` is the number of GCABs in each encoder and decoder stage."""

    widths: Tuple[int, int, int] = FULL_WIDTHS
    tsab_counts: Tuple[int, int, int] = (2, 3, 4)
    gcab_count: int = 16
    qkv_depthwise: bool = False
    attn_scale: Optional[float] = None

    def __post_init__(self):
        if len(self.widths) != 3 or len(self.tsab_counts) != 3:
            raise ValueError("the network has exactly three levels")
        if not all(a < b for a, b in zip(self.widths, self.widths[1:])):
            raise ValueError("channel widths must strictly increase across levels")
        if min(self.widths) < 1 or min(self.tsab_counts) < 1 or self.gcab_count < 1:
            raise ValueError("all counts and widths must be at least 1")

    @classmethod
    def preset(cls, name, **overrides):
        widths = {"full": FULL_WIDTHS, "light": LIGHT_WIDTHS}[name]
        return cls(widths=widths, **overrides)

    def to_dict(self):
        d = asdict(self)
        d["widths"] = list(self.widths)
        d["tsab_counts"] = list(self.tsab_counts)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["widths"] = tuple(d["widths"])
        d["tsab_counts"] = tuple(d["tsab_counts"])
        return cls(**d)


def init_srudc(cfg, seed=0):
    init = Initializer(seed)
    c = cfg.widths
    P = cfg.gcab_count
    return SrudcWeights(
        scatter_in=init.conv3(3, c[0]),
        scatter_levels=[
            [init.tsab(c[lv], cfg.qkv_depthwise) for _ in range(cfg.tsab_counts[lv])]
            for lv in range(3)
        ],
        scatter_down=[init.conv3(c[0], c[1]), init.conv3(c[1], c[2])],
        head=init.head(c[2]),
        image_in=init.conv3(3, c[0]),
        encoder=[[init.gcab(c[lv]) for _ in range(P)] for lv in range(3)],
        image_down=[init.conv3(c[0], c[1]), init.conv3(c[1], c[2])],
        ffb=[init.ffb(c[lv], c[lv]) for lv in range(3)],
        fuse=[init.pointwise(2 * c[lv], c[lv]) for lv in range(3)],
        decoder=[[init.gcab(c[lv]) for _ in range(P)] for lv in range(3)],
        up=[init.pointwise(c[1], c[0]), init.pointwise(c[2], c[1])],
        image_out=init.conv3(c[0], 3),
    )


def scattering_branch(I, w, cfg):
    """Return ([U1, U2, U3], (alpha_hat, m_hat))."""
    x = conv3x3(I, w.scatter_in.w, w.scatter_in.b)
    feats = []
    for lv in range(3):
        if lv > 0:
            down = w.scatter_down[lv - 1]
            x = conv3x3(x, down.w, down.b, stride=2)
        for blk in w.scatter_levels[lv]:
            x = tsab_forward(x, blk, cfg.attn_scale)
        feats.append(x)
    return feats, head_forward(feats[2], w.head)


def srudc_forward(I, w, cfg):
    """Restore an (H, W, 3) image; H and W must be divisible by 4.

    Returns ``(B_hat, alpha_hat, m_hat)``.
    """
    I = np.asarray(I, dtype=np.float64)
    if I.ndim != 3 or I.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) input, got {I.shape}")
    if I.shape[0] % 4 or I.shape[1] % 4:
        raise ValueError("input height and width must be divisible by 4")
    if w.image_in.w.shape[3] != cfg.widths[0]:
        raise ValueError("weights do not match the configured widths")

    U, (alpha_hat, m_hat) = scattering_branch(I, w, cfg)

    x = conv3x3(I, w.image_in.w, w.image_in.b)
    enc = []
    for lv in range(3):
        if lv > 0:
            down = w.image_down[lv - 1]
            x = conv3x3(x, down.w, down.b, stride=2)
        for blk in w.encoder[lv]:
            x = gcab_forward(x, blk)
        enc.append(x)

    x = enc[2]
    for lv in (2, 1, 0):
        if lv < 2:
            up = w.up[lv]
            x = pointwise(upsample2x(x), up.w, up.b)
        skip = ffb_forward(enc[lv], U[lv], w.ffb[lv])
        x = pointwise(np.concatenate([x, skip], axis=-1), w.fuse[lv].w, w.fuse[lv].b)
        for blk in w.decoder[lv]:
            x = gcab_forward(x, blk)

    B_hat = conv3x3(x, w.image_out.w, w.image_out.b)
    return B_hat, alpha_hat, m_hat


def save_weights(path, w, cfg):
    save_bundle(path, flatten(w), cfg.to_dict())


def load_weights(path):
    """Return ``(weights, cfg)`` from a bundle written by :func:`save_weights`."""
    flat, config = load_bundle(path)
    cfg = NetConfig.from_dict(config)
    return unflatten(init_srudc(cfg, 0), flat), cfg
