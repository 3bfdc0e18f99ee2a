"""Pure numpy fallback for the hot kernels.

Mirrors ``_ckernels.pyx`` function for function. The random streams are
integer-exact across backends; normals can differ in the last ulp because
numpy and libm may round ``log``/``cos`` differently.
"""
import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO_PI = 6.283185307179586
_INV_2_53 = 1.0 / 9007199254740992.0


def _finalize(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def random_u64(seed, offset, n):
    """Counter-based splitmix64: word ``i`` is ``finalize(seed + (i + 1) * GOLDEN)``."""
    with np.errstate(over="ignore"):
        counters = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
        return _finalize(np.uint64(seed) + counters * GOLDEN)


def uniforms(seed, offset, n):
    """Doubles in [0, 1) from the top 53 bits of each word."""
    return (random_u64(seed, offset, n) >> np.uint64(11)).astype(np.float64) * _INV_2_53


def standard_normals(seed, offset, n):
    """Box-Muller normals; pair ``j`` consumes words ``2j`` and ``2j + 1``.

    Normal ``i`` is the cosine branch of pair ``i // 2`` when ``i`` is even
    and the sine branch when odd, so any slice of the stream is addressable.
    """
    if n == 0:
        return np.empty(0)
    first_pair = offset // 2
    last_pair = (offset + n - 1) // 2
    npairs = last_pair - first_pair + 1
    u = uniforms(seed, 2 * first_pair, 2 * npairs)
    u1 = 1.0 - u[0::2]
    u2 = u[1::2]
    r = np.sqrt(-2.0 * np.log(u1))
    theta = _TWO_PI * u2
    z = np.empty(2 * npairs)
    z[0::2] = r * np.cos(theta)
    z[1::2] = r * np.sin(theta)
    start = offset - 2 * first_pair
    return z[start:start + n]


def conv2d_wrap(img, kernel):
    """Circular convolution of one 2-D plane, summed tap by tap."""
    img = np.asarray(img, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    kh, kw = kernel.shape
    ch, cw = kh // 2, kw // 2
    out = np.zeros_like(img)
    for i in range(kh):
        for j in range(kw):
            t = kernel[i, j]
            if t != 0.0:
                out += t * np.roll(img, (i - ch, j - cw), axis=(0, 1))
    return out
