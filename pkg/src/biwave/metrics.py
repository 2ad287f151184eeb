"""Image quality: SSIM, truth-mask contrast, and the dynamic-range sweep."""

import io
import csv
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._validation import check_image, check_same_shape
from .optics import DetectorModel, acquire_full
from .patterns import PatternFamily, make_basis
from .recon import reconstruct


@dataclass(frozen=True)
class SsimParams:
    """SSIM settings; ``L`` is the dynamic range of the pixel values."""

    L: float = 1.0
    window: str = "gaussian"
    size: int = 11
    sigma: float = 1.5

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"dynamic range L must be positive, got {self.L}")
        if self.window not in ("gaussian", "uniform"):
            raise ValueError(f"window must be 'gaussian' or 'uniform', got {self.window!r}")
        if self.size < 1:
            raise ValueError("window size must be >= 1")

    @property
    def C1(self):
        return (0.01 * self.L) ** 2

    @property
    def C2(self):
        return (0.03 * self.L) ** 2

    def kernel(self):
        """Normalized ``size x size`` window weights."""
        if self.window == "uniform":
            return np.full((self.size, self.size), 1.0 / self.size**2)
        t = np.arange(self.size) - (self.size - 1) / 2
        g = np.exp(-(t**2) / (2 * self.sigma**2))
        w = np.outer(g, g)
        return w / w.sum()


def ssim_map(x, y, params=None):
    """Per-window SSIM over all fully contained window positions."""
    p = SsimParams() if params is None else params
    x = check_image(x, "x", square=False)
    y = check_image(y, "y", square=False)
    check_same_shape(x, y)
    if p.size > min(x.shape):
        raise ValueError(f"window of size {p.size} does not fit a {x.shape} image")
    w = p.kernel()

    def filt(a):
        return np.tensordot(sliding_window_view(a, w.shape), w, axes=([2, 3], [0, 1]))

    mx, my = filt(x), filt(y)
    vx = filt(x * x) - mx * mx
    vy = filt(y * y) - my * my
    cxy = filt(x * y) - mx * my
    num = (2 * mx * my + p.C1) * (2 * cxy + p.C2)
    den = (mx * mx + my * my + p.C1) * (vx + vy + p.C2)
    return num / den


def ssim(x, y, params=None):
    """Mean structural similarity of two equally sized images."""
    return float(np.mean(ssim_map(x, y, params)))


def contrast(image, truth_mask):
    """``1 - mean(|background|) / mean(foreground)``, clamped to [0, 1]."""
    img = check_image(image, "image", square=False)
    mask = np.asarray(truth_mask)
    check_same_shape(img, mask, ("image", "truth_mask"))
    fg = mask.astype(bool)
    if not fg.any() or fg.all():
        raise ValueError("truth mask needs at least one foreground and one background pixel")
    fg_mean = img[fg].mean()
    if not fg_mean > 0:
        raise ValueError("foreground mean must be positive")
    c = 1.0 - np.abs(img[~fg]).mean() / fg_mean
    return float(min(1.0, max(0.0, c)))


SWEEP_FAMILIES = (PatternFamily.ROW_MAJOR_M, PatternFamily.HADAMARD, PatternFamily.RANDOM_SPECKLE)
_SWEEP_NAMES = {
    PatternFamily.ROW_MAJOR_M: "biwave",
    PatternFamily.QUADTREE_Q: "biwave-q",
    PatternFamily.HADAMARD: "hcgi",
    PatternFamily.RANDOM_SPECKLE: "rcgi",
}


@dataclass(frozen=True)
class SweepResult:
    rows: list = field(default_factory=list)
    seed: int = 0

    def ssim_of(self, family, bits):
        family = PatternFamily.parse(family)
        for fam, b, value in self.rows:
            if fam is family and b == bits:
                return value
        raise KeyError((family, bits))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["family", "bits", "ssim"])
        for fam, bits, value in self.rows:
            w.writerow([_SWEEP_NAMES[fam], "unlimited" if bits is None else bits, repr(value)])
        return buf.getvalue()

    def format_table(self):
        lines = [f"{'family':<9} {'bits':>9} {'ssim':>9}"]
        for fam, bits, value in self.rows:
            shown = "unlimited" if bits is None else str(bits)
            lines.append(f"{_SWEEP_NAMES[fam]:<9} {shown:>9} {value:>9.4f}")
        return "\n".join(lines)


def _row_seed(seed, family, bits):
    key = [int(seed), list(PatternFamily).index(family), 0 if bits is None else int(bits)]
    return int(np.random.SeedSequence(key).generate_state(1)[0])


def _rescale_to(values, truth):
    """Affine min-max map of ``values`` onto the value range of ``truth``."""
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.full_like(values, truth.mean())
    return truth.min() + (values - lo) / (hi - lo) * (truth.max() - truth.min())


def dynamic_range_sweep(scene, families=SWEEP_FAMILIES, bits_list=range(1, 17), detector=None, ssim_params=None, seed=0):
    """SSIM of each family's reconstruction at each detector depth.

    Every family gets the same pattern budget (``N = n*n``). The random speckle
    correlation estimate is defined only up to an affine map, so it is
    min-max rescaled onto the truth's value range before scoring.

    Args:
        scene: ground-truth reflectance grid.
        families: pattern families to compare.
        bits_list: detector depths; None stands for an unlimited detector.
        detector: base settings (noise, gain); ``bits`` and ``rng_seed`` are
            overridden per row. Defaults to per-cluster auto-ranging.
        ssim_params: window settings; ``L`` is replaced by the truth range.
        seed: master seed for the speckle masks and per-row noise.
    """
    truth = check_image(scene, "scene")
    base = DetectorModel(gain="cluster") if detector is None else detector
    span = float(truth.max() - truth.min())
    params = replace(SsimParams() if ssim_params is None else ssim_params, L=span if span > 0 else 1.0)
    rows = []
    for fam in (PatternFamily.parse(f) for f in families):
        if fam not in SWEEP_FAMILIES and fam is not PatternFamily.QUADTREE_Q:
            raise ValueError(f"unsupported sweep family {fam}")
        basis = make_basis(fam, truth.shape[0], seed=seed)
        for bits in bits_list:
            d = replace(base, bits=bits, rng_seed=_row_seed(seed, fam, bits))
            log = acquire_full(truth, basis, d)
            values = reconstruct(log, basis).values
            if fam is PatternFamily.RANDOM_SPECKLE:
                values = _rescale_to(values, truth)
            rows.append((fam, bits, ssim(values, truth, params)))
    return SweepResult(rows=rows, seed=seed)
