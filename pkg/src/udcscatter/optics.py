"""PSF kernels, circular convolution and additive sensor noise."""
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import ImageFormatError
from .imageio import encode_pfm, parse_pfm


@dataclass(frozen=True)
class PsfKernel:
    """Nonnegative odd-sized 2-D kernel normalized to unit sum."""

    taps: np.ndarray
    id: str = "kernel"

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64)
        if taps.ndim != 2:
            raise ValueError("kernel taps must be 2-D")
        kh, kw = taps.shape
        if kh % 2 == 0 or kw % 2 == 0:
            raise ValueError(f"kernel dimensions must be odd, got {kh}x{kw}")
        if not np.all(np.isfinite(taps)) or taps.min() < 0:
            raise ValueError("kernel taps must be finite and nonnegative")
        if abs(taps.sum() - 1.0) > 1e-9:
            raise ValueError(f"kernel taps sum to {taps.sum()!r}, expected 1")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def shape(self):
        return self.taps.shape

    @classmethod
    def from_taps(cls, taps, id="kernel"):
        """Clamp negative taps to zero and normalize to unit sum."""
        taps = np.clip(np.asarray(taps, dtype=np.float64), 0.0, None)
        total = taps.sum()
        if not total > 0:
            raise ValueError("kernel has no positive taps")
        return cls(taps / total, id)


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("noise sigma must be nonnegative")


def delta_kernel(size=1, id="delta"):
    taps = np.zeros((size, size))
    taps[size // 2, size // 2] = 1.0
    return PsfKernel(taps, id)


def gaussian_kernel(size, sigma, id=None):
    ax = np.arange(size) - size // 2
    g = np.exp(-(ax ** 2) / (2.0 * sigma ** 2))
    return PsfKernel.from_taps(np.outer(g, g), id or f"gauss{size}_{sigma:g}")


def parse_kernel_text(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ImageFormatError("empty kernel file", 0)
    try:
        kh, kw = (int(v) for v in lines[0].split())
    except ValueError:
        raise ImageFormatError(f"bad kernel header {lines[0]!r}", 0) from None
    try:
        rows = [[float(v) for v in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise ImageFormatError(f"bad kernel value: {exc}") from None
    if len(rows) != kh or any(len(r) != kw for r in rows):
        raise ImageFormatError(f"kernel body does not match header {kh}x{kw}")
    return np.array(rows, dtype=np.float64).reshape(kh, kw)


def load_kernel(path):
    """Load a kernel from a text grid or single-channel PFM.

    Taps are clamped at zero and normalized; the kernel id is the file stem.
    """
    path = Path(path)
    data = path.read_bytes()
    if data[:2] in (b"PF", b"Pf"):
        taps = parse_pfm(data).astype(np.float64)
        if taps.shape[2] != 1:
            raise ImageFormatError("kernel PFM must be single-channel", 0)
        taps = taps[..., 0]
    else:
        taps = parse_kernel_text(data.decode("utf-8"))
    kh, kw = taps.shape
    if kh % 2 == 0 or kw % 2 == 0:
        raise ValueError(f"kernel dimensions must be odd, got {kh}x{kw}")
    return PsfKernel.from_taps(taps, path.stem)


def save_kernel(kernel, path):
    path = Path(path)
    if path.suffix.lower() == ".pfm":
        path.write_bytes(encode_pfm(kernel.taps[..., None]))
        return
    kh, kw = kernel.shape
    lines = [f"{kh} {kw}"]
    lines += [" ".join(repr(float(t)) for t in row) for row in kernel.taps]
    path.write_text("\n".join(lines) + "\n")


def gen_diffraction_psf(aperture_mask, out_size, pad_factor=2, id="diffraction"):
    """Far-field (Fraunhofer) PSF of a binary aperture.

    The mask is zero-padded to ``pad_factor`` times its size, the PSF is
    ``|FFT(mask)|**2`` shifted so DC sits at the center, and the central
    ``out_size`` window is cropped and normalized.
    """
    mask = np.asarray(aperture_mask, dtype=np.float64)
    if mask.ndim != 2 or not np.any(mask > 0):
        raise ValueError("aperture mask must be a nonempty 2-D map")
    mask = (mask > 0).astype(np.float64)
    if isinstance(out_size, int):
        out_size = (out_size, out_size)
    oh, ow = out_size
    if oh % 2 == 0 or ow % 2 == 0:
        raise ValueError("PSF output size must be odd")
    gh, gw = pad_factor * mask.shape[0], pad_factor * mask.shape[1]
    if oh > gh or ow > gw:
        raise ValueError(f"output size {oh}x{ow} exceeds the FFT grid {gh}x{gw}")
    power = np.fft.fftshift(np.abs(np.fft.fft2(mask, s=(gh, gw))) ** 2)
    cy, cx = gh // 2, gw // 2
    crop = power[cy - oh // 2:cy + oh // 2 + 1, cx - ow // 2:cx + ow // 2 + 1]
    # enforce exact centrosymmetry; |FFT|^2 of a real mask is symmetric up to rounding
    crop = 0.5 * (crop + crop[::-1, ::-1])
    return PsfKernel.from_taps(crop, id)


def is_delta(kernel):
    kh, kw = kernel.shape
    return kernel.taps[kh // 2, kw // 2] == 1.0 and np.count_nonzero(kernel.taps) == 1


def _check_fits(img, kernel):
    kh, kw = kernel.shape
    if kh > img.shape[0] or kw > img.shape[1]:
        raise ValueError(
            f"kernel {kh}x{kw} larger than image {img.shape[0]}x{img.shape[1]}"
        )


def _centered_pad(kernel, shape):
    """Kernel zero-padded to ``shape`` with its center tap rolled to (0, 0)."""
    kh, kw = kernel.shape
    pad = np.zeros(shape)
    pad[:kh, :kw] = kernel.taps
    return np.roll(pad, (-(kh // 2), -(kw // 2)), axis=(0, 1))


def kernel_otf(kernel, shape):
    """Complex transfer function of ``kernel`` on a ``shape`` grid."""
    return np.fft.fft2(_centered_pad(kernel, shape))


def convolve_fft(img, kernel):
    """Per-channel circular convolution via the frequency domain."""
    img = np.asarray(img, dtype=np.float64)
    _check_fits(img, kernel)
    if is_delta(kernel):
        # exact identity instead of FFT round-off
        return img.copy()
    h, w = img.shape[:2]
    otf = np.fft.rfft2(_centered_pad(kernel, (h, w)))
    spec = np.fft.rfft2(img, axes=(0, 1))
    out = np.fft.irfft2(spec * otf[..., None], s=(h, w), axes=(0, 1))
    return out


def convolve_direct(img, kernel):
    """Spatial-domain circular convolution, O(H W kh kw)."""
    img = np.asarray(img, dtype=np.float64)
    _check_fits(img, kernel)
    out = np.empty_like(img)
    for c in range(img.shape[2]):
        out[..., c] = kernels.conv2d_wrap(np.ascontiguousarray(img[..., c]), kernel.taps)
    return out


def add_noise(img, spec):
    """Add i.i.d. Gaussian noise drawn from the ``spec.seed`` stream, clamp at 0.

    Samples are taken in C order of ``img``, so the result is a pure function
    of (img, sigma, seed).
    """
    img = np.asarray(img, dtype=np.float64)
    if spec.sigma == 0:
        return img.copy()
    z = kernels.standard_normals(spec.seed, 0, img.size).reshape(img.shape)
    return np.maximum(img + spec.sigma * z, 0.0)
