import numpy as np
import pytest

from udcscatter.tonemap import ToneCurve, clip_quantize, tonemap_forward, tonemap_inverse


def test_forward_examples():
    assert tonemap_forward(0.0) == 0.0
    assert tonemap_forward(0.25) == 0.5
    assert tonemap_forward(1.0) == pytest.approx(0.8, abs=1e-16)
    assert tonemap_forward(2.0, ToneCurve(c=2.0)) == 0.5


def test_inverse_examples():
    assert tonemap_inverse(0.5) == 0.25
    assert tonemap_inverse(0.0) == 0.0
    assert np.isfinite(tonemap_inverse(1.0))


def test_round_trip():
    x = np.concatenate([np.linspace(0, 50, 1001), np.geomspace(1e-9, 1e4, 200)])
    x = x[tonemap_forward(x) <= 1 - 1e-6]
    np.testing.assert_allclose(tonemap_inverse(tonemap_forward(x)), x, rtol=1e-9, atol=1e-12)


def test_monotone():
    y = tonemap_forward(np.linspace(0, 100, 10001))
    assert np.all(np.diff(y) > 0)


def test_quantize():
    assert clip_quantize(np.array([1.7, 0.5, 0.0, -0.2])).tolist() == [1.0, 128 / 255, 0.0, 0.0]


def test_curve_validation():
    with pytest.raises(ValueError):
        ToneCurve(c=0)
    with pytest.raises(ValueError):
        ToneCurve(kind="aces")
