"""Forward passes of the restoration network's building blocks."""
from .layers import (
    conv3x3,
    depthwise3x3,
    gap,
    layer_norm,
    leaky_relu,
    pointwise,
    relu,
    sigmoid,
    silu,
    softmax,
)


def _check_channels(x, c, what):
    if x.ndim != 3 or x.shape[2] != c:
        raise ValueError(f"{what}: expected {c} channels, got shape {x.shape}")


def _proj(x, pw, dw):
    y = pointwise(x, pw.w, pw.b)
    return y if dw is None else depthwise3x3(y, dw.w, dw.b)


def channel_attention_matrix(q, k, scale=None):
    """Row-stochastic C x C attention from flattened (HW, C) queries and keys.

    Logits are ``q.T @ k`` times ``scale`` (default ``1 / HW``).
    """
    n = q.shape[0]
    scale = 1.0 / n if scale is None else scale
    return softmax((q.T @ k) * scale, axis=-1)


def csa_forward(x, w, scale=None, return_attention=False):
    """Channel-wise self-attention with a residual connection.

    Q, K and V are (optionally depthwise-filtered) 1x1 projections of the
    layer-normalized input; attention is over channels, so its cost does not
    grow with the spatial size.
    """
    _check_channels(x, w.norm.g.shape[0], "csa")
    h, wd, c = x.shape
    xn = layer_norm(x, w.norm.g, w.norm.b)
    q = _proj(xn, w.q, w.q_dw).reshape(h * wd, c)
    k = _proj(xn, w.k, w.k_dw).reshape(h * wd, c)
    v = _proj(xn, w.v, w.v_dw).reshape(h * wd, c)
    attn = channel_attention_matrix(q, k, scale)
    out = x + (v @ attn.T).reshape(h, wd, c)
    return (out, attn) if return_attention else out


def ffn_forward(x, w):
    y = layer_norm(x, w.norm.g, w.norm.b)
    y = silu(pointwise(y, w.expand.w, w.expand.b))
    return pointwise(y, w.contract.w, w.contract.b)


def tsab_forward(x, w, scale=None):
    x = csa_forward(x, w.csa, scale)
    return x + ffn_forward(x, w.ffn)


def gating(y, w):
    """``depthwise(pw1(y)) * sigmoid(pw2(y))``."""
    a = depthwise3x3(pointwise(y, w.pw1.w, w.pw1.b), w.dw.w, w.dw.b)
    return a * sigmoid(pointwise(y, w.pw2.w, w.pw2.b))


def channel_attention_scale(y, w):
    """Squeeze-excite weights in (0, 1) per channel."""
    z = relu(gap(y) @ w.ca_down.w + w.ca_down.b)
    return sigmoid(z @ w.ca_up.w + w.ca_up.b)


def gcab_forward(y, w):
    _check_channels(y, w.conv.w.shape[2], "gcab")
    t = gating(relu(conv3x3(y, w.conv.w, w.conv.b)), w)
    return y + t * channel_attention_scale(t, w)


def ffb_coefficients(u, w):
    """Per-pixel affine coefficients (v, w) predicted from scattering features."""
    v = pointwise(leaky_relu(pointwise(u, w.v1.w, w.v1.b)), w.v2.w, w.v2.b)
    b = pointwise(leaky_relu(pointwise(u, w.w1.w, w.w1.b)), w.w2.w, w.w2.b)
    return v, b


def ffb_forward(f_e, u_o, w):
    if f_e.shape[:2] != u_o.shape[:2]:
        raise ValueError(f"spatial mismatch: {f_e.shape[:2]} vs {u_o.shape[:2]}")
    v, b = ffb_coefficients(u_o, w)
    if v.shape != f_e.shape:
        raise ValueError(f"fusion weights {v.shape} do not match features {f_e.shape}")
    return v * f_e + b


def head_forward(u3, w):
    """Return ``(alpha_hat, m_hat) = W2 sigmoid(W1 GAP(u3))`` with no output squashing."""
    _check_channels(u3, w.w1.shape[1], "head")
    out = w.w2 @ sigmoid(w.w1 @ gap(u3))
    return float(out[0]), float(out[1])

