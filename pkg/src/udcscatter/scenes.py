"""Seeded synthetic HDR scenes for tests, benchmarks and demos."""
import numpy as np


def random_hdr_scene(seed, height=128, width=128, peak=1.0, highlights=0):
    """Smooth chromatic background plus fine texture and optional highlights.

    Values are nonnegative; without highlights they stay at or below ``peak``.
    Highlights are small disks of radiance ``8 * peak``.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width] / max(height, width)
    img = np.empty((height, width, 3))
    for c in range(3):
        acc = np.full((height, width), rng.uniform(0.2, 0.6))
        for _ in range(4):
            fy, fx = rng.uniform(0.5, 4.0, size=2)
            ph = rng.uniform(0, 2 * np.pi)
            acc += rng.uniform(0.05, 0.25) * np.sin(2 * np.pi * (fy * yy + fx * xx) + ph)
        img[..., c] = acc
    img += 0.05 * rng.uniform(-1, 1, size=img.shape)
    img = np.clip(img, 0.0, None)
    img *= peak / max(img.max(), 1e-12)
    for _ in range(highlights):
        cy, cx = rng.integers(0, height), rng.integers(0, width)
        r = rng.uniform(1.5, 4.0)
        disk = (np.arange(height)[:, None] - cy) ** 2 + (np.arange(width)[None, :] - cx) ** 2 <= r * r
        img[disk] = 8.0 * peak
    return img
