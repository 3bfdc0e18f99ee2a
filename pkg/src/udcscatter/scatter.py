"""Homogeneous-medium scattering model for display-covered cameras.

Light reaching the sensor is split into a transmitted part ``alpha * L`` and
a veiling part ``m * (1 - alpha)``, with transmittance
``alpha = exp(-beta * d)`` for scattering coefficient ``beta`` and path
length ``d`` through the panel.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import UnidentifiableError
from .imaging import to_grayscale
from .optics import convolve_fft

ALPHA_RANGE = (0.6, 0.9)
M_GUARD = 1e-6


def alpha_from_beta_d(beta, d):
    if not (math.isfinite(beta) and math.isfinite(d)) or beta < 0 or d < 0:
        raise ValueError("beta and d must be finite and nonnegative")
    return math.exp(-beta * d)


@dataclass(frozen=True)
class ScatteringParams:
    alpha: float
    m: float
    beta: Optional[float] = None
    d: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if not self.m >= 0:
            raise ValueError(f"m must be nonnegative, got {self.m!r}")
        if (self.beta is None) != (self.d is None):
            raise ValueError("beta and d must be given together")
        if self.beta is not None:
            expected = alpha_from_beta_d(self.beta, self.d)
            if abs(self.alpha - expected) >= 1e-12:
                raise ValueError("alpha is inconsistent with exp(-beta * d)")

    @classmethod
    def from_beta_d(cls, beta, d, m):
        return cls(alpha_from_beta_d(beta, d), m, beta, d)

    def to_record(self):
        rec = {"alpha": self.alpha, "m": self.m}
        if self.beta is not None:
            rec.update(beta=self.beta, d=self.d)
        return rec

    @classmethod
    def from_record(cls, rec):
        return cls(float(rec["alpha"]), float(rec["m"]), rec.get("beta"), rec.get("d"))


def transmitted(img, p):
    return p.alpha * np.asarray(img, dtype=np.float64)


def scattered(p):
    """Veiling radiance added uniformly to every sample."""
    return p.m * (1.0 - p.alpha)


def scatter_forward(img, p):
    return transmitted(img, p) + scattered(p)


def scatter_inverse(img, p):
    if not p.alpha > 0:
        raise ValueError("alpha must be positive to invert scattering")
    img = np.asarray(img, dtype=np.float64)
    return np.maximum((img - scattered(p)) / p.alpha, 0.0)


def compute_m(img):
    """Spatial mean of the gray-scale image; keeps average brightness fixed."""
    return float(np.mean(to_grayscale(img)))


def sample_alpha(rng, lo=ALPHA_RANGE[0], hi=ALPHA_RANGE[1]):
    """Uniform draw from [lo, hi] using one word of a :class:`CounterRng`."""
    return lo + (hi - lo) * rng.uniform()


class Estimate(NamedTuple):
    alpha: float
    m: float
    residual: float


def estimate_params(degraded_lin, clean, kernel):
    """Least-squares fit of ``degraded ~ alpha * (clean * k) + c``.

    All channels are pooled into one regression. The 2x2 normal equations
    are solved in centered form; ``m = c / (1 - alpha)``. ``residual`` is the
    RMS of the fit.
    """
    y = np.asarray(degraded_lin, dtype=np.float64)
    clean = np.asarray(clean, dtype=np.float64)
    if y.shape != clean.shape:
        raise ValueError(f"shape mismatch: {y.shape} vs {clean.shape}")
    pred = convolve_fft(clean, kernel).ravel()
    y = y.ravel()
    n = y.size
    p_mean = pred.mean()
    y_mean = y.mean()
    dp = pred - p_mean
    spp = float(dp @ dp)
    scale = max(float(np.abs(pred).max()), 1e-300)
    if spp <= n * (1e-12 * scale) ** 2:
        raise UnidentifiableError("predictor is spatially constant; alpha is unidentifiable")
    alpha = float(dp @ (y - y_mean)) / spp
    c = y_mean - alpha * p_mean
    residual = float(np.sqrt(np.mean((alpha * pred + c - y) ** 2)))
    if 1.0 - alpha < M_GUARD:
        raise UnidentifiableError(
            f"alpha_hat={alpha!r} is too close to 1; m is unidentifiable",
            alpha_hat=alpha,
            residual=residual,
        )
    return Estimate(alpha, c / (1.0 - alpha), residual)
