"""Tone mapping and clipping from linear radiance to display range."""
from dataclasses import dataclass

import numpy as np

SATURATION = 1.0 - 1e-6
KINDS = ("reinhard-offset",)


@dataclass(frozen=True)
class ToneCurve:
    """``y = x / (x + c)``: strictly increasing, 0 -> 0, tends to 1."""

    kind: str = "reinhard-offset"
    c: float = 0.25

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown tone curve {self.kind!r}")
        if not self.c > 0:
            raise ValueError("tone curve constant must be positive")


def tonemap_forward(img, curve=ToneCurve()):
    x = np.asarray(img, dtype=np.float64)
    return np.clip(x / (x + curve.c), 0.0, 1.0)


def tonemap_inverse(img, curve=ToneCurve()):
    """``x = c y / (1 - y)``; values at or above 1 - 1e-6 are saturated."""
    y = np.clip(np.asarray(img, dtype=np.float64), 0.0, SATURATION)
    return curve.c * y / (1.0 - y)


def clip_quantize(img):
    """Clamp to [0, 1] and round to the 8-bit grid (ties away from zero)."""
    y = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    return np.floor(y * 255.0 + 0.5) / 255.0
