"""Forward-only layer primitives on (H, W, C) float64 feature maps.

Spatial convolutions use circular padding so that cyclic shifts commute with
every layer.
"""
import numpy as np

LN_EPS = 1e-5


def pointwise(x, w, b=None):
    """1x1 convolution; ``w`` has shape (C_in, C_out)."""
    out = x @ w
    return out if b is None else out + b


def _shifted(x, i, j):
    # tap (i, j) of a 3x3 stencil reads x[y + i - 1, x + j - 1]
    return np.roll(x, (1 - i, 1 - j), axis=(0, 1))


def depthwise3x3(x, w, b=None):
    """Per-channel 3x3 correlation; ``w`` has shape (3, 3, C)."""
    out = np.zeros_like(x)
    for i in range(3):
        for j in range(3):
            out += _shifted(x, i, j) * w[i, j]
    return out if b is None else out + b


def conv3x3(x, w, b=None, stride=1):
    """Dense 3x3 correlation; ``w`` has shape (3, 3, C_in, C_out)."""
    out = np.zeros(x.shape[:2] + (w.shape[3],))
    for i in range(3):
        for j in range(3):
            out += _shifted(x, i, j) @ w[i, j]
    if stride == 2:
        out = out[::2, ::2]
    return out if b is None else out + b


def upsample2x(x):
    return np.repeat(np.repeat(x, 2, axis=0), 2, axis=1)


def layer_norm(x, g, b, eps=LN_EPS):
    """Normalize each pixel across channels."""
    mu = x.mean(axis=-1, keepdims=True)
    var = ((x - mu) ** 2).mean(axis=-1, keepdims=True)
    return (x - mu) / np.sqrt(var + eps) * g + b


def softmax(z, axis=-1):
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def relu(z):
    return np.maximum(z, 0.0)


def silu(z):
    return z * sigmoid(z)


def leaky_relu(z, slope=0.1):
    return np.where(z >= 0, z, slope * z)


def gap(x):
    """Global average pool to a length-C vector."""
    return x.mean(axis=(0, 1))
