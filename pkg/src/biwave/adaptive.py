"""Cluster-by-cluster adaptive acquisition with subtree pruning.

The DC pattern and the first wavelet level are always measured. After a level
is complete, a pattern of the next level is skipped when both hold:

* every measured coefficient of the parent block (one for the row-major
  family, three orientations for the quadtree family) satisfies
  ``|b| <= coeff_threshold``;
* the partial reconstruction from the levels measured so far is
  ``<= region_threshold`` everywhere on the pattern's support.

With both thresholds at zero, ideal detectors and a nonnegative scene, the
second clause only fires on blocks whose true content is zero, so the result
equals the full reconstruction.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import check_nonnegative, check_scene
from .optics import AcquisitionLog, _detect, cluster_full_scales, ideal_fluxes
from .patterns import PatternFamily
from .recon import iwt_reconstruct
from .transform import haar1d_synthesize, haar2d_synthesize

# slack for round-off in the partial reconstruction of empty blocks
_ROUNDOFF = 1e-12


@dataclass(frozen=True)
class AdaptivePolicy:
    """Pruning thresholds.

    ``coeff_threshold`` is in bucket units, ``region_threshold`` in
    reflectance units. With ``relative=True`` both are fractions: the
    coefficient threshold of the measured DC bucket and the region threshold
    of the mean scene reflectance (DC bucket / N).
    ``levels`` restricts pruning to the given wavelet levels (None = all).
    """

    coeff_threshold: float = 0.0
    region_threshold: float = 0.0
    levels: range | None = None
    relative: bool = False

    def __post_init__(self):
        check_nonnegative(self.coeff_threshold, "coeff_threshold")
        check_nonnegative(self.region_threshold, "region_threshold")

    @classmethod
    def from_dc(cls, tau_rel, eps_rel=0.0, levels=None):
        return cls(tau_rel, eps_rel, levels, relative=True)

    def resolve(self, dc_bucket, N):
        if not self.relative:
            return self.coeff_threshold, self.region_threshold
        return self.coeff_threshold * abs(dc_bucket), self.region_threshold * abs(dc_bucket) / N


def sampling_rate(log):
    """Fraction of the basis that was actually projected."""
    if log.measured_count == 0:
        raise ValueError("empty acquisition log")
    return log.measured_count / log.N


def _partial(c, basis, levels):
    if basis.family is PatternFamily.ROW_MAJOR_M:
        return haar1d_synthesize(c, levels=levels).reshape(basis.n, basis.n)
    return haar2d_synthesize(c, levels=levels)


def _next_level_candidates(basis, s, b_abs, measured, recon, tau, eps):
    """Indices of level ``s + 1`` and a boolean prune verdict for each."""
    n = basis.n
    if basis.family is PatternFamily.ROW_MAJOR_M:
        lo = 2 ** (s + 1)
        child = np.arange(lo, 2 * lo)
        parent = 2**s + (child - lo) // 2
        coeff_ok = ~measured[parent] | (b_abs[parent] <= tau)
        region = recon.ravel().reshape(lo, -1).max(axis=1)
        return child, coeff_ok & (region <= eps)
    m = 2 ** (s + 1)
    h = n // m
    rows, cols = np.divmod(np.arange(m * m), m)
    pm = m // 2
    pblock = (rows // 2) * pm + cols // 2
    coeff_ok = np.ones(m * m, dtype=bool)
    for o in range(3):
        parent = pm * pm + o * pm * pm + pblock
        coeff_ok &= ~measured[parent] | (b_abs[parent] <= tau)
    region = recon.reshape(m, h, m, h).max(axis=(1, 3)).ravel()
    verdict = coeff_ok & (region <= eps)
    child = np.concatenate([m * m + o * m * m + np.arange(m * m) for o in range(3)])
    return child, np.tile(verdict, 3)


def run_adaptive(scene, basis, detector, policy=None):
    """Adaptive acquisition and reconstruction.

    Returns ``(image, log)``; the log lists both measured and skipped
    patterns. Pruning for level ``s + 1`` is decided only after the whole of
    level ``s`` has been measured.
    """
    if not basis.family.is_haar:
        raise ValueError(f"adaptive acquisition needs a Haar basis, got {basis.family.name}")
    policy = AdaptivePolicy() if policy is None else policy
    refl = check_scene(scene)
    f1, f2 = ideal_fluxes(refl, basis)
    fs = cluster_full_scales(f1, f2, basis, detector, refl)
    N = len(basis)

    measured = np.zeros(N, dtype=bool)
    b = np.zeros(N)
    order = []
    reads = []

    def take(js):
        i1, i2 = _detect(f1[js], f2[js], js, detector, fs[basis.cluster_ids()[js]])
        measured[js] = True
        b[js] = i1 - i2
        order.append(js)
        reads.append((i1, i2))

    clusters = basis.clusters
    for r in clusters[:2]:
        take(np.arange(r.start, r.stop))
    tau, eps = policy.resolve(b[0], N)
    eps_eff = eps + _ROUNDOFF * max(1.0, abs(b[0]) / N)

    for s in range(len(clusters) - 2):
        if policy.levels is not None and (s + 1) not in policy.levels:
            take(np.arange(clusters[s + 2].start, clusters[s + 2].stop))
            continue
        c = np.where(measured, basis.weights * b, 0.0)
        recon = _partial(c, basis, s + 1)
        child, prune = _next_level_candidates(basis, s, np.abs(b), measured, recon, tau, eps_eff)
        keep = np.sort(child[~prune])
        if keep.size:
            take(keep)

    js = np.concatenate(order)
    i1 = np.concatenate([r[0] for r in reads])
    i2 = np.concatenate([r[1] for r in reads])
    log = AcquisitionLog(
        family=basis.family,
        n=basis.n,
        detector=detector,
        full_scale=tuple(float(v) for v in fs),
        j=js,
        i1=i1,
        i2=i2,
        b=i1 - i2,
        skipped=np.flatnonzero(~measured),
        basis_seed=basis.seed,
        pattern_count=N,
    )
    return iwt_reconstruct(log, basis), log


def progress_rows(log, basis):
    """Per-cluster ``(level, measured, skipped, cumulative_rate)`` tuples."""
    measured = np.zeros(len(basis), dtype=bool)
    measured[log.j] = True
    rows = []
    total = 0
    for r in basis.clusters:
        got = int(measured[r.start : r.stop].sum())
        total += got
        rows.append((int(basis.levels[r.start]), got, len(r) - got, total / len(basis)))
    return rows


def format_progress(rows):
    lines = [f"{'level':>5} {'measured':>9} {'skipped':>9} {'rate':>9}"]
    lines += [f"{lvl:>5} {m:>9} {sk:>9} {rate:>9.4%}" for lvl, m, sk, rate in rows]
    return "\n".join(lines)
