"""Illumination pattern bases.

Two complete orthonormal Haar layouts are provided:

``ROW_MAJOR_M``
    The 1D Haar system on the flattened (row-major) image. Pattern ``j >= 1``
    at level ``s`` and shift ``k`` (``j = 2**s + k``) is +1 on the first half
    and -1 on the second half of the run ``[k*N/2**s, (k+1)*N/2**s)``.
``QUADTREE_Q``
    The separable 2D Haar system. Level ``s`` splits the image into
    ``2**s x 2**s`` square blocks and carries three orientations per block:
    0 = x-split (+left/-right), 1 = y-split (+top/-bottom),
    2 = diagonal (+TL,+BR / -TR,-BL).

Both start with the all-ones DC pattern (index 0, level -1). Entries are kept
ternary; the normalization weight that makes ``weight * entries`` orthonormal
is stored separately.

Two baselines support comparisons: natural-order ``HADAMARD`` rows and seeded
0/1 ``RANDOM_SPECKLE`` masks.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_power_of_two

_MAX_RANDOM_SIDE = 128


class PatternFamily(enum.Enum):
    ROW_MAJOR_M = "m"
    QUADTREE_Q = "q"
    HADAMARD = "hadamard"
    RANDOM_SPECKLE = "random"

    @classmethod
    def parse(cls, value):
        """Accept an enum member, its value, or a CLI alias."""
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {
            "m": cls.ROW_MAJOR_M, "rowmajorm": cls.ROW_MAJOR_M, "biwave": cls.ROW_MAJOR_M,
            "q": cls.QUADTREE_Q, "quadtreeq": cls.QUADTREE_Q, "biwave-q": cls.QUADTREE_Q,
            "hadamard": cls.HADAMARD, "hcgi": cls.HADAMARD,
            "random": cls.RANDOM_SPECKLE, "randomspeckle": cls.RANDOM_SPECKLE, "rcgi": cls.RANDOM_SPECKLE,
        }
        try:
            return aliases[key.replace("_", "")]
        except KeyError:
            raise ValueError(f"unknown pattern family {value!r}") from None

    @property
    def is_haar(self):
        return self in (PatternFamily.ROW_MAJOR_M, PatternFamily.QUADTREE_Q)


def mother_wavelet(t):
    """Haar step: 1 on [0, 1/2), -1 on [1/2, 1), 0 elsewhere.

    Works elementwise on arrays and returns ints.
    """
    t = np.asarray(t, dtype=float)
    out = np.where((t >= 0.0) & (t < 0.5), 1, np.where((t >= 0.5) & (t < 1.0), -1, 0))
    return int(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Pattern:
    index: int
    level: int
    shift: tuple
    orient: int | None
    entries: np.ndarray = field(repr=False)
    weight: float

    @property
    def n(self):
        return self.entries.shape[0]


def _readonly(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Basis:
    """An ordered pattern set with per-index metadata.

    Patterns are generated on demand (``basis[j]``); the metadata arrays have
    one entry per pattern. ``clusters`` holds one ``range`` per scaling level,
    coarse to fine, with the DC pattern in its own cluster.
    """

    family: PatternFamily
    n: int
    seed: int
    levels: np.ndarray = field(repr=False)
    shifts: np.ndarray = field(repr=False)
    orients: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    clusters: tuple = field(repr=False)

    def __len__(self):
        return self.levels.size

    def __iter__(self):
        for j in range(len(self)):
            yield self[j]

    def __getitem__(self, j):
        j = int(j)
        if not 0 <= j < len(self):
            raise IndexError(f"pattern index {j} out of range for {len(self)} patterns")
        shift = tuple(int(v) for v in self.shifts[j]) if self.family is PatternFamily.QUADTREE_Q else (int(self.shifts[j, 0]),)
        orient = int(self.orients[j]) if self.family is PatternFamily.QUADTREE_Q and j > 0 else None
        return Pattern(
            index=j,
            level=int(self.levels[j]),
            shift=shift,
            orient=orient,
            entries=_readonly(pattern_entries(self, j)),
            weight=float(self.weights[j]),
        )

    @property
    def N(self):
        return self.n * self.n

    def cluster_of(self, j):
        for c, r in enumerate(self.clusters):
            if j in r:
                return c
        raise IndexError(j)

    def cluster_ids(self):
        """Cluster number of every pattern as an int array."""
        ids = np.empty(len(self), dtype=np.int64)
        for c, r in enumerate(self.clusters):
            ids[r.start : r.stop] = c
        return ids

    def entries_matrix(self):
        """Stack of all patterns as a ``(len, N)`` int8 matrix (small n only)."""
        return np.stack([pattern_entries(self, j).ravel() for j in range(len(self))])


def make_basis(family, n, seed=0, count=None):
    """Build a pattern basis for an ``n x n`` grid.

    Args:
        family: a :class:`PatternFamily` or alias string.
        n: side length; a power of two for the structured families.
        seed: RNG seed, only used by ``RANDOM_SPECKLE``.
        count: number of random masks (``RANDOM_SPECKLE`` only); defaults to
            ``n * n`` so every family gets the same pattern budget.
    """
    family = PatternFamily.parse(family)
    if family is PatternFamily.RANDOM_SPECKLE:
        if not isinstance(n, (int, np.integer)) or n < 2:
            raise ValueError(f"n must be an integer >= 2, got {n}")
        if n > _MAX_RANDOM_SIDE:
            raise ValueError(f"random speckle bases are limited to n <= {_MAX_RANDOM_SIDE}")
    else:
        n = check_power_of_two(n)
    n = int(n)
    N = n * n
    if count is not None and family is not PatternFamily.RANDOM_SPECKLE:
        raise ValueError("count is only meaningful for random speckle bases")
    size = N if count is None else int(count)
    if size < 1:
        raise ValueError("count must be positive")

    levels = np.zeros(size, dtype=np.int64)
    shifts = np.zeros((size, 2), dtype=np.int64)
    orients = np.full(size, -1, dtype=np.int64)
    weights = np.full(size, 1.0 / n)
    levels[0] = -1

    if family is PatternFamily.ROW_MAJOR_M:
        q = N.bit_length() - 1
        clusters = [range(0, 1)]
        for s in range(q):
            lo, hi = 2**s, 2 ** (s + 1)
            levels[lo:hi] = s
            shifts[lo:hi, 0] = np.arange(hi - lo)
            weights[lo:hi] = np.sqrt(2.0 ** (s - q))
            clusters.append(range(lo, hi))
    elif family is PatternFamily.QUADTREE_Q:
        L = n.bit_length() - 1
        clusters = [range(0, 1)]
        for s in range(L):
            m = 2**s
            lo = m * m
            rows, cols = np.divmod(np.arange(m * m), m)
            for o in range(3):
                sl = slice(lo + o * m * m, lo + (o + 1) * m * m)
                levels[sl] = s
                shifts[sl, 0] = cols  # alpha: block column
                shifts[sl, 1] = rows  # beta: block row
                orients[sl] = o
                weights[sl] = m / n
            clusters.append(range(lo, 4 * lo))
    elif family is PatternFamily.HADAMARD:
        levels[:] = 0
        levels[0] = -1
        shifts[:, 0] = np.arange(size)
        clusters = [range(0, 1), range(1, size)]
    else:
        levels[:] = 0
        shifts[:, 0] = np.arange(size)
        clusters = [range(0, size)]

    return Basis(
        family=family,
        n=n,
        seed=int(seed),
        levels=_readonly(levels),
        shifts=_readonly(shifts),
        orients=_readonly(orients),
        weights=_readonly(weights),
        clusters=tuple(clusters),
    )


def random_mask(seed, j, size):
    """Boolean speckle mask ``j`` of a seeded random family (p = 1/2 per pixel)."""
    rng = np.random.default_rng([int(seed), int(j)])
    return rng.random(size) < 0.5


def pattern_entries(basis, j):
    """Ternary ``n x n`` int8 entries of pattern ``j``."""
    n, N = basis.n, basis.N
    fam = basis.family
    if fam is PatternFamily.RANDOM_SPECKLE:
        return random_mask(basis.seed, j, N).astype(np.int8).reshape(n, n)
    if j == 0:
        return np.ones((n, n), dtype=np.int8)
    if fam is PatternFamily.HADAMARD:
        i = np.arange(N, dtype=np.uint64)
        parity = np.bitwise_count(i & np.uint64(j)) & 1
        return (1 - 2 * parity.astype(np.int8)).reshape(n, n)
    s = int(basis.levels[j])
    if fam is PatternFamily.ROW_MAJOR_M:
        run = N >> s
        start = int(basis.shifts[j, 0]) * run
        flat = np.zeros(N, dtype=np.int8)
        flat[start : start + run // 2] = 1
        flat[start + run // 2 : start + run] = -1
        return flat.reshape(n, n)
    m = n >> s
    h = m // 2
    alpha, beta = int(basis.shifts[j, 0]), int(basis.shifts[j, 1])
    block = np.empty((m, m), dtype=np.int8)
    o = int(basis.orients[j])
    if o == 0:
        block[:, :h], block[:, h:] = 1, -1
    elif o == 1:
        block[:h, :], block[h:, :] = 1, -1
    else:
        block[:h, :h] = block[h:, h:] = 1
        block[:h, h:] = block[h:, :h] = -1
    out = np.zeros((n, n), dtype=np.int8)
    out[beta * m : (beta + 1) * m, alpha * m : (alpha + 1) * m] = block
    return out


def children_of(basis, j):
    """Indices at the next level whose support lies inside pattern ``j``'s."""
    if not basis.family.is_haar:
        raise ValueError(f"{basis.family.name} has no multiresolution structure")
    if not 0 <= j < len(basis):
        raise IndexError(j)
    fam = basis.family
    if j == 0:
        return list(basis.clusters[1]) if len(basis.clusters) > 1 else []
    s = int(basis.levels[j])
    if s + 2 >= len(basis.clusters):
        return []
    if fam is PatternFamily.ROW_MAJOR_M:
        k = int(basis.shifts[j, 0])
        base = 2 ** (s + 1)
        return [base + 2 * k, base + 2 * k + 1]
    alpha, beta = int(basis.shifts[j, 0]), int(basis.shifts[j, 1])
    m = 2 ** (s + 1)
    out = []
    for o in range(3):
        for dy in (0, 1):
            for dx in (0, 1):
                out.append(m * m + o * m * m + (2 * beta + dy) * m + (2 * alpha + dx))
    return sorted(out)


def _rle(flat):
    change = np.flatnonzero(np.diff(flat)) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [flat.size]))
    return " ".join(f"{int(flat[a])}x{b - a}" for a, b in zip(starts, ends))


def to_rle_line(p):
    """Serialize a pattern as ``j s shift orient w RLE...``."""
    shift = ",".join(str(v) for v in p.shift)
    orient = "-" if p.orient is None else str(p.orient)
    return f"{p.index} {p.level} {shift} {orient} {p.weight!r} {_rle(p.entries.ravel())}"


def from_rle_line(line):
    """Parse :func:`to_rle_line` output back into a :class:`Pattern`."""
    parts = line.split()
    if len(parts) < 6:
        raise ValueError(f"malformed pattern line: {line!r}")
    j, s, shift, orient, w = parts[:5]
    values = []
    for tok in parts[5:]:
        v, cnt = tok.split("x")
        values.extend([int(v)] * int(cnt))
    flat = np.array(values, dtype=np.int8)
    n = int(round(np.sqrt(flat.size)))
    if n * n != flat.size:
        raise ValueError("run lengths do not describe a square pattern")
    return Pattern(
        index=int(j),
        level=int(s),
        shift=tuple(int(v) for v in shift.split(",")),
        orient=None if orient == "-" else int(orient),
        entries=_readonly(flat.reshape(n, n)),
        weight=float(w),
    )


def pattern_masks_u8(p):
    """8-bit images for export: (signed view, +1 mask, -1 mask)."""
    e = p.entries.astype(np.int16)
    signed = ((e + 1) * 255 // 2).astype(np.uint8)
    plus = np.where(e == 1, 255, 0).astype(np.uint8)
    minus = np.where(e == -1, 255, 0).astype(np.uint8)
    return signed, plus, minus
