"""Invariant checks for the reference network, runnable without pytest."""
import dataclasses
from typing import List, NamedTuple

import numpy as np

from .blocks import (
    channel_attention_scale,
    csa_forward,
    ffb_coefficients,
    ffb_forward,
    gating,
    gcab_forward,
    head_forward,
    tsab_forward,
)
from .layers import depthwise3x3, pointwise
from .losses import OMEGA_C, OMEGA_I, loss_total
from .model import NetConfig, init_srudc, srudc_forward
from .weights import Initializer, Pointwise, decode_bundle, encode_bundle, flatten, unflatten, zeros_like

N_PERMUTATIONS = 20
TOL = 1e-6


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str


def _permute(x, perm):
    h, w, c = x.shape
    return x.reshape(h * w, c)[perm].reshape(h, w, c)


def _max_err(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def run_selftest(seed=0, size=32, config="light", gcabs=4) -> List[Check]:
    rng = np.random.default_rng(seed)
    cfg = NetConfig.preset(config, gcab_count=gcabs)
    init = Initializer(seed)
    c = cfg.widths[0]
    checks = []

    def check(name, passed, detail):
        checks.append(Check(name, bool(passed), detail))

    x = rng.normal(size=(size // 2, size // 2, c))
    tsab = init.tsab(c)
    gcab = init.gcab(c)

    # attention rows are a distribution over channels, whatever the spatial size
    worst = 0.0
    shapes_ok = True
    for hw in [(4, 4), (8, 6), (size // 2, size // 2)]:
        _, attn = csa_forward(rng.normal(size=hw + (c,)), tsab.csa, return_attention=True)
        shapes_ok &= attn.shape == (c, c)
        worst = max(worst, float(np.max(np.abs(attn.sum(axis=1) - 1.0))))
    check("softmax rows sum to 1", worst < TOL and shapes_ok, f"max |row sum - 1| = {worst:.2e}, C x C = {shapes_ok}")

    err_csa = err_tsab = err_head = 0.0
    head = init.head(c)
    y_csa = csa_forward(x, tsab.csa)
    y_tsab = tsab_forward(x, tsab)
    z_head = head_forward(x, head)
    for _ in range(N_PERMUTATIONS):
        perm = rng.permutation(x.shape[0] * x.shape[1])
        xp = _permute(x, perm)
        err_csa = max(err_csa, _max_err(csa_forward(xp, tsab.csa), _permute(y_csa, perm)))
        err_tsab = max(err_tsab, _max_err(tsab_forward(xp, tsab), _permute(y_tsab, perm)))
        err_head = max(err_head, _max_err(head_forward(xp, head), z_head))
    check("CSA permutation equivariance", err_csa < TOL, f"max err {err_csa:.2e} over {N_PERMUTATIONS} permutations")
    check("TSAB permutation equivariance", err_tsab < TOL, f"max err {err_tsab:.2e} over {N_PERMUTATIONS} permutations")
    check("head GAP invariance", err_head < TOL, f"max err {err_head:.2e} over {N_PERMUTATIONS} permutations")

    # depthwise-filtered Q/K/V is only shift-equivariant
    csa_dw = init.csa(c, qkv_depthwise=True)
    y_dw = csa_forward(x, csa_dw)
    err_shift = 0.0
    for _ in range(N_PERMUTATIONS):
        s = tuple(rng.integers(0, x.shape[0], size=2))
        err_shift = max(err_shift, _max_err(csa_forward(np.roll(x, s, (0, 1)), csa_dw), np.roll(y_dw, s, (0, 1))))
    check("CSA (depthwise Q/K/V) shift equivariance", err_shift < TOL, f"max err {err_shift:.2e}")

    # FFB affine identities
    ffb = init.ffb(c, c)
    u = rng.normal(size=x.shape)
    ident = dataclasses.replace(
        zeros_like(ffb), v2=Pointwise(np.zeros((c, c)), np.ones(c)), w2=Pointwise(np.zeros((c, c)), np.zeros(c))
    )
    e1 = _max_err(ffb_forward(x, u, ident), x)
    only_w = dataclasses.replace(ffb, v2=Pointwise(np.zeros((c, c)), np.zeros(c)))
    e2 = _max_err(ffb_forward(x, u, only_w), ffb_forward(rng.normal(size=x.shape), u, only_w))
    x2 = rng.normal(size=x.shape)
    v, _ = ffb_coefficients(u, ffb)
    e3 = _max_err(ffb_forward(x, u, ffb) - ffb_forward(x2, u, ffb), v * (x - x2))
    check("FFB v=1, w=0 is identity", e1 < TOL, f"max err {e1:.2e}")
    check("FFB v=0 ignores features", e2 < TOL, f"max err {e2:.2e}")
    check("FFB affine difference identity", e3 < TOL, f"max err {e3:.2e}")

    # zero weights collapse every residual block to the identity
    e_csa = _max_err(csa_forward(x, zeros_like(tsab.csa)), x)
    e_tsab = _max_err(tsab_forward(x, zeros_like(tsab)), x)
    e_gcab = _max_err(gcab_forward(x, zeros_like(gcab)), x)
    check("zero-weight CSA is identity", e_csa == 0.0, f"max err {e_csa:.2e}")
    check("zero-weight TSAB is identity", e_tsab == 0.0, f"max err {e_tsab:.2e}")
    check("zero-weight GCAB is identity", e_gcab == 0.0, f"max err {e_gcab:.2e}")

    half_gate = dataclasses.replace(gcab, pw2=Pointwise(np.zeros((c, c)), np.zeros(c)))
    expected = 0.5 * depthwise3x3(pointwise(x, gcab.pw1.w, gcab.pw1.b), gcab.dw.w, gcab.dw.b)
    e_gate = _max_err(gating(x, half_gate), expected)
    check("gating with zero gate weights halves the value path", e_gate < 1e-12, f"max err {e_gate:.2e}")
    scale = channel_attention_scale(100.0 * x, gcab)
    check("channel attention scale in (0, 1)", bool(np.all((scale > 0) & (scale < 1))), f"range [{scale.min():.3g}, {scale.max():.3g}]")

    zero_head = dataclasses.replace(head, w2=np.zeros_like(head.w2))
    check("head with W2 = 0 outputs (0, 0)", head_forward(x, zero_head) == (0.0, 0.0), "")

    # full network
    I = rng.uniform(size=(size, size, 3))
    weights = init_srudc(cfg, seed)
    B_hat, a_hat, m_hat = srudc_forward(I, weights, cfg)
    B_again, a_again, m_again = srudc_forward(I, init_srudc(cfg, seed), cfg)
    check(
        "srudc output shape",
        B_hat.shape == (size, size, 3),
        f"{B_hat.shape} for {config} config, P={gcabs}",
    )
    check("srudc output finite", bool(np.all(np.isfinite(B_hat))) and np.isfinite(a_hat) and np.isfinite(m_hat), "")
    same = B_hat.tobytes() == B_again.tobytes() and (a_hat, m_hat) == (a_again, m_again)
    check("srudc seed determinism", same, "bitwise equal across two initializations")
    s = (4 * int(rng.integers(1, size // 4)), 4 * int(rng.integers(0, size // 4)))
    B_shift, a_shift, m_shift = srudc_forward(np.roll(I, s, (0, 1)), weights, cfg)
    e_shift = max(_max_err(B_shift, np.roll(B_hat, s, (0, 1))), abs(a_shift - a_hat), abs(m_shift - m_hat))
    check("srudc cyclic shift equivariance", e_shift < TOL, f"shift {s}, max err {e_shift:.2e}")
    flat = flatten(weights)
    back, _ = decode_bundle(encode_bundle(flat, cfg.to_dict()))
    restored = unflatten(weights, back)
    B_back, _, _ = srudc_forward(I, restored, cfg)
    check("weight bundle round trip", B_back.tobytes() == B_hat.tobytes(), f"{len(flat)} tensors")

    # loss decomposition with the stated weights
    B = rng.uniform(size=(8, 8, 3))
    Bh = B + rng.normal(scale=0.1, size=B.shape)
    L, lc, li = loss_total(Bh, B, 0.7, 0.75, 0.31, 0.3)
    resid = L - OMEGA_C * lc - OMEGA_I * li
    L2, _, _ = loss_total(B, B, 0.85, 0.75, 0.3, 0.3)
    check(
        "loss decomposition L = 0.1 L_c + 1 L_i",
        resid == 0.0 and abs(L2 - 0.001) < 1e-15,
        f"residual {resid:.1e}; alpha off by 0.1 gives L = {L2:.6g}",
    )
    return checks


def format_report(checks):
    lines = [f"{'PASS' if ch.passed else 'FAIL'}  {ch.name}" + (f"  ({ch.detail})" if ch.detail else "") for ch in checks]
    failed = sum(not ch.passed for ch in checks)
    lines.append(f"{len(checks) - failed}/{len(checks)} checks passed")
    return "\n".join(lines)
