import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from biwave.metrics import SsimParams, contrast, dynamic_range_sweep, ssim, ssim_map
from biwave.optics import DetectorModel
from biwave.phantoms import Phantom, PhantomKind, generate_phantom


def ssim_oracle(x, y, params):
    """Each window's weighted moments computed from scratch with Python loops."""
    w = params.kernel()
    k = w.shape[0]
    vals = []
    for r in range(x.shape[0] - k + 1):
        for c in range(x.shape[1] - k + 1):
            px, py = x[r : r + k, c : c + k], y[r : r + k, c : c + k]
            mx = sum(w[i, j] * px[i, j] for i in range(k) for j in range(k))
            my = sum(w[i, j] * py[i, j] for i in range(k) for j in range(k))
            vx = sum(w[i, j] * (px[i, j] - mx) ** 2 for i in range(k) for j in range(k))
            vy = sum(w[i, j] * (py[i, j] - my) ** 2 for i in range(k) for j in range(k))
            cxy = sum(w[i, j] * (px[i, j] - mx) * (py[i, j] - my) for i in range(k) for j in range(k))
            vals.append(
                (2 * mx * my + params.C1) * (2 * cxy + params.C2)
                / ((mx**2 + my**2 + params.C1) * (vx + vy + params.C2))
            )
    return float(np.mean(vals))


@pytest.mark.parametrize("params", [SsimParams(window="uniform", size=3), SsimParams(size=7, sigma=1.5), SsimParams(L=2.0, size=8)])
def test_ssim_matches_window_oracle(params, rng):
    for _ in range(10):
        x, y = rng.random((8, 8)), rng.random((8, 8))
        assert ssim(x, y, params) == pytest.approx(ssim_oracle(x, y, params), abs=1e-12)


def test_ssim_full_size_window_on_12x12(rng):
    x = rng.random((12, 12))
    y = x + 0.1 * rng.standard_normal((12, 12))
    p = SsimParams()
    assert ssim_map(x, y, p).shape == (2, 2)
    assert ssim(x, y, p) == pytest.approx(ssim_oracle(x, y, p), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(arrays(float, (8, 8), elements=st.floats(0, 1)), arrays(float, (8, 8), elements=st.floats(0, 1)))
def test_ssim_symmetric_and_bounded(x, y):
    p = SsimParams(window="uniform", size=4)
    a, b = ssim(x, y, p), ssim(y, x, p)
    assert a == pytest.approx(b, abs=1e-12)
    assert -1 - 1e-12 <= a <= 1 + 1e-12
    assert ssim(x, x, p) == pytest.approx(1.0, abs=1e-12)


def test_ssim_errors(rng):
    with pytest.raises(ValueError):
        ssim(rng.random((8, 8)), rng.random((8, 9)), SsimParams(size=3))
    with pytest.raises(ValueError):
        ssim(rng.random((8, 8)), rng.random((8, 8)))  # 11x11 window does not fit
    with pytest.raises(ValueError):
        SsimParams(L=0)
    with pytest.raises(ValueError):
        SsimParams(window="box")


def test_contrast_examples(rng):
    mask = (rng.random((16, 16)) < 0.3).astype(np.uint8)
    assert contrast(mask.astype(float), mask) == 1.0
    assert contrast(np.full((16, 16), 0.4), mask) == 0.0
    half = mask * 1.0 + (1 - mask) * 0.25
    assert contrast(half, mask) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        contrast(np.ones((4, 4)), np.zeros((4, 4)))


@pytest.fixture(scope="module")
def glyph64():
    return generate_phantom(Phantom(PhantomKind.GLYPH, 0.15, 64, 0, text="HELV"))


def test_sweep_unlimited_is_perfect(glyph64):
    res = dynamic_range_sweep(glyph64, ["biwave", "biwave-q", "hcgi"], [None])
    for fam in ("biwave", "biwave-q", "hcgi"):
        assert res.ssim_of(fam, None) == pytest.approx(1.0, abs=1e-6)


def test_sweep_biwave_improves_with_bits(glyph64):
    res = dynamic_range_sweep(glyph64, ["biwave"], range(1, 11))
    vals = [res.ssim_of("biwave", b) for b in range(1, 11)]
    assert all(b >= a - 0.02 for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 0.99


def test_sweep_ordering_at_one_bit(glyph64):
    res = dynamic_range_sweep(glyph64, ["biwave", "hcgi"], [1])
    assert res.ssim_of("biwave", 1) > res.ssim_of("hcgi", 1)


def test_sweep_outputs(glyph64):
    res = dynamic_range_sweep(glyph64, ["biwave"], [1, None], DetectorModel(gain="global"))
    lines = res.to_csv().splitlines()
    assert lines[0] == "family,bits,ssim"
    assert lines[1].startswith("biwave,1,") and lines[2].startswith("biwave,unlimited,")
    assert "unlimited" in res.format_table()
    with pytest.raises(KeyError):
        res.ssim_of("hcgi", 1)


def test_sweep_deterministic(glyph64):
    a = dynamic_range_sweep(glyph64, ["biwave", "rcgi"], [2], DetectorModel(noise_sigma=0.5, gain="cluster"), seed=3)
    b = dynamic_range_sweep(glyph64, ["biwave", "rcgi"], [2], DetectorModel(noise_sigma=0.5, gain="cluster"), seed=3)
    assert a.to_csv() == b.to_csv()
