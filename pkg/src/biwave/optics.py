"""Bi-frequency projector and two-channel bucket detector simulation.

A signed pattern is split into a +1 mask (first colour) and a -1 mask
(second colour). Each frequency-selecting detector integrates the scene over
its mask, picks up optional Gaussian noise, and is quantized to a finite
number of levels between 0 and its full scale. The signed bucket value is the
difference of the two quantized readings.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._validation import check_nonnegative, check_scene
from .patterns import PatternFamily, make_basis, random_mask
from .transform import fwht

GAIN_MODES = ("global", "cluster")


@dataclass(frozen=True)
class Scene:
    reflectance: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = check_scene(self.reflectance).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "reflectance", arr)

    @property
    def n(self):
        return self.reflectance.shape[0]


@dataclass(frozen=True)
class DetectorModel:
    """Detector settings shared by both channels.

    Attributes:
        bits: quantizer depth 1..16, or None for an unlimited (ideal) detector.
        full_scale: reading that saturates a channel; None means calibrate
            from the scene before acquisition.
        noise_sigma: std of additive Gaussian noise per channel reading.
        rng_seed: seed of the per-pattern noise substreams.
        gain: "global" uses one full scale for every pattern; "cluster"
            auto-ranges once per scaling level (cluster) of the basis.
    """

    bits: int | None = None
    full_scale: float | None = None
    noise_sigma: float = 0.0
    rng_seed: int = 0
    gain: str = "global"

    def __post_init__(self):
        if self.bits is not None:
            if isinstance(self.bits, bool) or not isinstance(self.bits, (int, np.integer)) or not 1 <= self.bits <= 16:
                raise ValueError(f"bits must be an integer in 1..16 or None, got {self.bits!r}")
        if self.full_scale is not None and not (math.isfinite(self.full_scale) and self.full_scale > 0):
            raise ValueError(f"full_scale must be positive, got {self.full_scale}")
        check_nonnegative(self.noise_sigma, "noise_sigma")
        if self.gain not in GAIN_MODES:
            raise ValueError(f"gain must be one of {GAIN_MODES}, got {self.gain!r}")


class BucketRecord(NamedTuple):
    j: int
    i1: float
    i2: float
    b: float


@dataclass(frozen=True, eq=False)
class AcquisitionLog:
    """Ordered two-channel readings of one acquisition run.

    ``full_scale`` holds one value per basis cluster (all equal under global
    gain). Arrays ``j``, ``i1``, ``i2``, ``b`` are aligned, in measurement
    order; ``skipped`` lists pattern indices that were never projected.
    """

    family: PatternFamily
    n: int
    detector: DetectorModel
    full_scale: tuple
    j: np.ndarray = field(repr=False)
    i1: np.ndarray = field(repr=False)
    i2: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    skipped: np.ndarray = field(repr=False)
    basis_seed: int = 0
    pattern_count: int | None = None

    def __post_init__(self):
        if np.intersect1d(self.j, self.skipped).size:
            raise ValueError("a pattern cannot be both measured and skipped")

    @property
    def measured_count(self):
        return int(self.j.size)

    @property
    def N(self):
        return self.pattern_count if self.pattern_count is not None else self.n * self.n

    @property
    def records(self):
        return [BucketRecord(int(j), float(a), float(c), float(d)) for j, a, c, d in zip(self.j, self.i1, self.i2, self.b)]

    def basis(self):
        count = self.pattern_count if self.family is PatternFamily.RANDOM_SPECKLE else None
        return make_basis(self.family, self.n, self.basis_seed, count=count)

    def metadata(self):
        d = self.detector
        return {
            "family": self.family.value,
            "n": str(self.n),
            "bits": "unlimited" if d.bits is None else str(d.bits),
            "full_scale": ",".join(repr(float(v)) for v in self.full_scale),
            "noise_sigma": repr(float(d.noise_sigma)),
            "seed": str(d.rng_seed),
            "gain": d.gain,
            "basis_seed": str(self.basis_seed),
            "patterns": str(self.N),
        }

    def to_csv(self):
        """CSV text ``j,i1,i2,b,skipped`` with rows sorted by pattern index."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "i1", "i2", "b", "skipped"])
        # + 0.0 folds negative zeros
        rows = [(int(j), repr(float(a) + 0.0), repr(float(c) + 0.0), repr(float(d) + 0.0), 0) for j, a, c, d in zip(self.j, self.i1, self.i2, self.b)]
        rows += [(int(j), "", "", "", 1) for j in self.skipped]
        rows.sort(key=lambda r: r[0])
        w.writerows(rows)
        return buf.getvalue()

    def write(self, path):
        """Write ``path`` (CSV) and ``path + '.meta'`` (key = value lines)."""
        from .io import atomic_write_text, format_metadata

        atomic_write_text(path, self.to_csv())
        atomic_write_text(str(path) + ".meta", format_metadata(self.metadata()))

    @classmethod
    def read(cls, path):
        from .io import read_metadata

        meta = read_metadata(str(path) + ".meta")
        js, i1, i2, b, skipped = [], [], [], [], []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["j", "i1", "i2", "b", "skipped"]:
                raise ValueError(f"{path}: unexpected CSV header {header}")
            for row in reader:
                if len(row) != 5:
                    raise ValueError(f"{path}: malformed row {row}")
                if row[4] == "1":
                    skipped.append(int(row[0]))
                else:
                    js.append(int(row[0]))
                    i1.append(float(row[1]))
                    i2.append(float(row[2]))
                    b.append(float(row[3]))
        bits = None if meta["bits"] == "unlimited" else int(meta["bits"])
        det = DetectorModel(
            bits=bits,
            noise_sigma=float(meta["noise_sigma"]),
            rng_seed=int(meta["seed"]),
            gain=meta.get("gain", "global"),
        )
        return cls(
            family=PatternFamily.parse(meta["family"]),
            n=int(meta["n"]),
            detector=det,
            full_scale=tuple(float(v) for v in meta["full_scale"].split(",")),
            j=np.array(js, dtype=np.int64),
            i1=np.array(i1),
            i2=np.array(i2),
            b=np.array(b),
            skipped=np.array(sorted(skipped), dtype=np.int64),
            basis_seed=int(meta.get("basis_seed", 0)),
            pattern_count=int(meta["patterns"]) if "patterns" in meta else None,
        )


def split_pattern(p):
    """Return the (+1 mask, -1 mask) pair as 0/1 uint8 grids."""
    e = p.entries
    return (e == 1).astype(np.uint8), (e == -1).astype(np.uint8)


def quantize(v, d):
    """Clamp to [0, full_scale] and round to the nearest of 2**bits levels.

    Ties go to the lower level. Identity when ``d.bits`` is None. Accepts
    scalars or arrays; ``d.full_scale`` must be set.
    """
    if d.bits is None:
        return v
    fs = d.full_scale
    if fs is None:
        raise ValueError("quantize needs a concrete full_scale")
    steps = 2**d.bits - 1
    x = np.clip(np.asarray(v, dtype=float), 0.0, fs) * (steps / fs)
    out = np.ceil(x - 0.5) * (fs / steps)
    return float(out) if out.ndim == 0 else out


def calibrate_full_scale(scene):
    """Ideal DC-pattern flux of the scene (1.0 for an all-dark scene)."""
    total = float(np.sum(check_scene(scene)))
    return total if total > 0 else 1.0


def _noise(d, j):
    rng = np.random.default_rng([int(d.rng_seed), int(j)])
    return rng.normal(0.0, d.noise_sigma, size=2)


def _detect(f1, f2, js, d, full_scales):
    """Noise then per-channel quantization for the patterns ``js``."""
    f1 = np.array(f1, dtype=float)
    f2 = np.array(f2, dtype=float)
    if d.noise_sigma > 0:
        noise = np.array([_noise(d, j) for j in js]).reshape(-1, 2)
        f1 += noise[:, 0]
        f2 += noise[:, 1]
    if d.bits is None:
        return f1, f2
    fs = np.broadcast_to(np.asarray(full_scales, dtype=float), f1.shape)
    steps = 2**d.bits - 1
    i1 = np.ceil(np.clip(f1, 0.0, fs) * (steps / fs) - 0.5) * (fs / steps)
    i2 = np.ceil(np.clip(f2, 0.0, fs) * (steps / fs) - 0.5) * (fs / steps)
    return i1, i2


def measure(scene, p, d):
    """Project one pattern and read both detector channels."""
    refl = check_scene(scene)
    if refl.shape != p.entries.shape:
        raise ValueError(f"scene is {refl.shape} but pattern is {p.entries.shape}")
    plus, minus = split_pattern(p)
    f1 = float(np.sum(plus * refl))
    f2 = float(np.sum(minus * refl))
    fs = d.full_scale if d.full_scale is not None else calibrate_full_scale(refl)
    i1, i2 = _detect([f1], [f2], [p.index], d, fs)
    return BucketRecord(p.index, float(i1[0]), float(i2[0]), float(i1[0] - i2[0]))


def ideal_fluxes(scene, basis):
    """Noise-free channel fluxes ``(f1, f2)`` for every pattern of ``basis``.

    Uses block sums per level (Haar), one fast Walsh-Hadamard transform
    (Hadamard) or a chunked mask product (random speckle).
    """
    refl = check_scene(scene)
    if refl.shape != (basis.n, basis.n):
        raise ValueError(f"scene is {refl.shape} but basis side is {basis.n}")
    fam = basis.family
    size = len(basis)
    f1 = np.empty(size)
    f2 = np.zeros(size)
    total = refl.sum()
    if fam is PatternFamily.ROW_MAJOR_M:
        f1[0] = total
        seg = refl.ravel()
        # seg holds 2**(s+1) segment sums on entry to level s
        for s in range(len(basis.clusters) - 2, -1, -1):
            lo = 2**s
            f1[lo : 2 * lo], f2[lo : 2 * lo] = seg[0::2], seg[1::2]
            seg = seg[0::2] + seg[1::2]
    elif fam is PatternFamily.QUADTREE_Q:
        n = basis.n
        f1[0] = total
        for s in range(len(basis.clusters) - 1):
            m = 2**s
            h = n // (2 * m)
            sub = refl.reshape(2 * m, h, 2 * m, h).sum(axis=(1, 3))
            tl, tr = sub[0::2, 0::2].ravel(), sub[0::2, 1::2].ravel()
            bl, br = sub[1::2, 0::2].ravel(), sub[1::2, 1::2].ravel()
            lo = m * m
            f1[lo : 2 * lo], f2[lo : 2 * lo] = tl + bl, tr + br
            f1[2 * lo : 3 * lo], f2[2 * lo : 3 * lo] = tl + tr, bl + br
            f1[3 * lo : 4 * lo], f2[3 * lo : 4 * lo] = tl + br, tr + bl
    elif fam is PatternFamily.HADAMARD:
        h = fwht(refl.ravel())
        # round-off can push a channel a hair below zero
        f1 = np.clip((total + h) / 2, 0.0, None)
        f2 = np.clip((total - h) / 2, 0.0, None)
        f1[0], f2[0] = total, 0.0
    else:
        flat = refl.ravel()
        for j in range(size):
            f1[j] = flat[random_mask(basis.seed, j, flat.size)].sum()
    return f1, f2


def cluster_full_scales(f1, f2, basis, d, scene):
    """Full scale per basis cluster according to ``d.gain``."""
    nclu = len(basis.clusters)
    if d.full_scale is not None:
        return np.full(nclu, float(d.full_scale))
    if d.gain == "global":
        return np.full(nclu, calibrate_full_scale(scene))
    out = np.empty(nclu)
    for c, r in enumerate(basis.clusters):
        peak = max(f1[r.start : r.stop].max(), f2[r.start : r.stop].max())
        out[c] = peak if peak > 0 else 1.0
    return out


def acquire_full(scene, basis, d):
    """Measure every pattern of ``basis`` in order."""
    refl = check_scene(scene)
    f1, f2 = ideal_fluxes(refl, basis)
    fs = cluster_full_scales(f1, f2, basis, d, refl)
    js = np.arange(len(basis), dtype=np.int64)
    i1, i2 = _detect(f1, f2, js, d, fs[basis.cluster_ids()])
    return AcquisitionLog(
        family=basis.family,
        n=basis.n,
        detector=d,
        full_scale=tuple(float(v) for v in fs),
        j=js,
        i1=i1,
        i2=i2,
        b=i1 - i2,
        skipped=np.empty(0, dtype=np.int64),
        basis_seed=basis.seed,
        pattern_count=len(basis),
    )
