"""Fidelity metrics (PSNR, SSIM) and HSV distribution statistics."""
import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .imaging import rgb_to_hsv

SSIM_WIN = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(ref, test):
    ref = np.asarray(ref, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if ref.shape != test.shape:
        raise ValueError(f"dimension mismatch: {ref.shape} vs {test.shape}")
    return ref, test


def psnr(ref, test, peak=1.0):
    """Peak signal-to-noise ratio in dB; ``inf`` for identical inputs."""
    ref, test = _pair(ref, test)
    mse = float(np.mean((ref - test) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def gaussian_window_1d(size=SSIM_WIN, sigma=SSIM_SIGMA):
    ax = np.arange(size) - size // 2
    g = np.exp(-(ax ** 2) / (2.0 * sigma ** 2))
    return g / g.sum()


def _filter_valid(x, g):
    # separable weighted mean over every full window
    rows = sliding_window_view(x, len(g), axis=0) @ g
    return sliding_window_view(rows, len(g), axis=1) @ g


def ssim(ref, test, data_range=1.0):
    """Single-scale SSIM, per channel on valid windows, averaged.

    11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03.
    """
    ref, test = _pair(ref, test)
    if ref.ndim == 2:
        ref, test = ref[..., None], test[..., None]
    if min(ref.shape[:2]) < SSIM_WIN:
        raise ValueError(f"images must be at least {SSIM_WIN}x{SSIM_WIN} for SSIM")
    g = gaussian_window_1d()
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    scores = []
    for c in range(ref.shape[2]):
        x, y = ref[..., c], test[..., c]
        mx, my = _filter_valid(x, g), _filter_valid(y, g)
        sxx = _filter_valid(x * x, g) - mx * mx
        syy = _filter_valid(y * y, g) - my * my
        sxy = _filter_valid(x * y, g) - mx * my
        num = (2 * mx * my + c1) * (2 * sxy + c2)
        den = (mx * mx + my * my + c1) * (sxx + syy + c2)
        scores.append(np.mean(num / den))
    return float(np.mean(scores))


@dataclass
class HsvHistogram:
    bins_h: np.ndarray
    bins_s: np.ndarray
    bins_v: np.ndarray
    total: int

    @property
    def nbins(self):
        return len(self.bins_h)

    def normalized(self):
        return tuple(b / self.total for b in (self.bins_h, self.bins_s, self.bins_v))

    def merge(self, other):
        if other.nbins != self.nbins:
            raise ValueError("histogram bin counts differ")
        return HsvHistogram(
            self.bins_h + other.bins_h,
            self.bins_s + other.bins_s,
            self.bins_v + other.bins_v,
            self.total + other.total,
        )

    def to_csv(self):
        lines = ["bin_index,h,s,v"]
        for i in range(self.nbins):
            lines.append(f"{i},{self.bins_h[i]},{self.bins_s[i]},{self.bins_v[i]}")
        return "\n".join(lines) + "\n"


def _bin(values, lo, hi, nbins):
    idx = np.floor((values - lo) / (hi - lo) * nbins).astype(np.int64)
    return np.bincount(np.clip(idx, 0, nbins - 1).ravel(), minlength=nbins)


def hsv_histograms(images, nbins=64):
    """Accumulate H, S and V counts over every pixel of every LDR image.

    Bins are uniform over [0, 360) for hue and [0, 1] for S and V; the
    top edge falls into the last bin.
    """
    images = list(images)
    if not images:
        raise ValueError("need at least one image")
    hist = None
    for img in images:
        h, s, v = rgb_to_hsv(np.clip(img, 0.0, 1.0))
        part = HsvHistogram(
            _bin(h, 0.0, 360.0, nbins), _bin(s, 0.0, 1.0, nbins), _bin(v, 0.0, 1.0, nbins), h.size
        )
        hist = part if hist is None else hist.merge(part)
    return hist


def hist_distance(a, b):
    """Per-channel L1 distance of normalized histograms, each in [0, 2]."""
    if a.nbins != b.nbins:
        raise ValueError(f"bin mismatch: {a.nbins} vs {b.nbins}")
    return tuple(float(np.abs(p - q).sum()) for p, q in zip(a.normalized(), b.normalized()))


def mean_saturation(img):
    return float(np.mean(rgb_to_hsv(np.clip(img, 0.0, 1.0))[1]))


@dataclass
class MetricReport:
    psnr: float
    ssim: float

    def line(self, name):
        p = "inf" if math.isinf(self.psnr) else f"{self.psnr:.6f}"
        return f"{name} {p} {self.ssim:.6f}"


def report(ref, test):
    return MetricReport(psnr(ref, test), ssim(ref, test))
