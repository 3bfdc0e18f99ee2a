"""Image containers, color conversions and patch extraction.

Images are plain ``numpy`` arrays of shape ``(H, W, 3)``:

* HDR images hold linear radiance, finite and nonnegative, unbounded above;
* LDR images hold display-referred values in [0, 1]. An 8-bit LDR image is
  still a float array whose values are exact multiples of 1/255.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GrayWeights:
    r: float = 0.299
    g: float = 0.587
    b: float = 0.114

    def __post_init__(self):
        if min(self.r, self.g, self.b) <= 0:
            raise ValueError("gray weights must be positive")
        if abs(self.r + self.g + self.b - 1.0) > 1e-15:
            raise ValueError("gray weights must sum to 1")


REC601 = GrayWeights()


def _as_rgb(img):
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    return img


def check_hdr(img):
    """Validate an HDR image and return it as float64."""
    img = _as_rgb(img)
    if not np.all(np.isfinite(img)):
        raise ValueError("HDR image contains non-finite values")
    if img.min() < 0:
        raise ValueError("HDR image contains negative radiance")
    return img


def check_ldr(img):
    """Validate an LDR image (values in [0, 1]) and return it as float64."""
    img = _as_rgb(img)
    if not np.all(np.isfinite(img)) or img.min() < 0 or img.max() > 1:
        raise ValueError("LDR image values must lie in [0, 1]")
    return img


def is_8bit(img):
    """True when every value is an exact multiple of 1/255."""
    img = np.asarray(img, dtype=np.float64)
    return bool(np.all(np.round(img * 255.0) / 255.0 == img))


def to_grayscale(img, weights=REC601):
    img = _as_rgb(img)
    return weights.r * img[..., 0] + weights.g * img[..., 1] + weights.b * img[..., 2]


def rgb_to_hsv(img):
    """Hexcone HSV of an LDR image.

    Returns ``(h, s, v)`` maps with hue in degrees [0, 360) and s, v in
    [0, 1]. Hue is 0 for achromatic pixels.
    """
    img = _as_rgb(img)
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    v = img.max(axis=2)
    mn = img.min(axis=2)
    delta = v - mn
    s = np.zeros_like(v)
    np.divide(delta, v, out=s, where=v > 0)

    chroma = delta > 0
    safe = np.where(chroma, delta, 1.0)
    hr = ((g - b) / safe) % 6.0
    hg = (b - r) / safe + 2.0
    hb = (r - g) / safe + 4.0
    sector = np.where(v == r, hr, np.where(v == g, hg, hb))
    h = np.where(chroma, 60.0 * sector, 0.0)
    h = np.where(h >= 360.0, h - 360.0, h)
    return h, s, v


def hsv_to_rgb(h, s, v):
    """Inverse of :func:`rgb_to_hsv`; stacks to an (H, W, 3) image."""
    h = np.asarray(h, dtype=np.float64) % 360.0
    s = np.asarray(s, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    c = v * s
    hp = h / 60.0
    x = c * (1.0 - np.abs(hp % 2.0 - 1.0))
    zero = np.zeros_like(c)
    sector = np.floor(hp).astype(int) % 6
    choices_r = [c, x, zero, zero, x, c]
    choices_g = [x, c, c, x, zero, zero]
    choices_b = [zero, zero, x, c, c, x]
    m = v - c
    r = np.choose(sector, choices_r) + m
    g = np.choose(sector, choices_g) + m
    b = np.choose(sector, choices_b) + m
    return np.stack([r, g, b], axis=-1)


def crop_patch(img, x0, y0, w, h):
    """Copy the ``w`` x ``h`` sub-rectangle whose top-left corner is (x0, y0)."""
    img = np.asarray(img)
    H, W = img.shape[:2]
    if w < 1 or h < 1 or x0 < 0 or y0 < 0 or x0 + w > W or y0 + h > H:
        raise IndexError(
            f"patch (x0={x0}, y0={y0}, w={w}, h={h}) exceeds image bounds {W}x{H}"
        )
    return img[y0:y0 + h, x0:x0 + w].copy()
