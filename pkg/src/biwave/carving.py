"""Shape from silhouettes by voxel space carving.

Geometry: a cube of side ``extent`` centred on the origin, z vertical. A view
at angle ``theta`` rotates the scene about z and projects orthographically:
image column from ``u = x cos(theta) + y sin(theta)``, image row from ``z``
(row 0 at the top). Image ``n x n`` pixels cover the cube's face exactly.
"""

import os
import struct
from dataclasses import dataclass, field

import numpy as np
from skimage.filters import threshold_otsu

from ._validation import check_image
from .io import atomic_write_bytes, atomic_write_text, read_pgm, write_pgm

_MAGIC = b"BWVX"


@dataclass(frozen=True, eq=False)
class SilhouetteSet:
    """Binary masks with their turntable angles, sorted by angle."""

    views: tuple = field(repr=False)
    n: int = 0

    def __post_init__(self):
        views = sorted(((float(a) % 360.0, np.asarray(m).astype(bool)) for a, m in self.views), key=lambda v: v[0])
        if not views:
            raise ValueError("a silhouette set needs at least one view")
        angles = [a for a, _ in views]
        if len(set(angles)) != len(angles):
            raise ValueError("view angles must be distinct")
        shape = views[0][1].shape
        if len(shape) != 2 or shape[0] != shape[1] or any(m.shape != shape for _, m in views):
            raise ValueError("all masks must be square and of the same size")
        object.__setattr__(self, "views", tuple(views))
        object.__setattr__(self, "n", shape[0])

    @property
    def angles(self):
        return [a for a, _ in self.views]


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    """Occupancy indexed ``[z, y, x]``; ``pitch`` is world units per voxel."""

    G: int
    pitch: float
    occupancy: np.ndarray = field(repr=False)
    empty_views: tuple = ()

    @property
    def extent(self):
        return self.G * self.pitch

    @property
    def volume(self):
        return float(self.occupancy.sum()) * self.pitch**3


def binarize(image, method="otsu", threshold=None):
    """Threshold an image into a 0/1 uint8 mask (``image >= t``).

    ``method`` is ``"otsu"`` (256-bin histogram over [min, max]) or
    ``"fixed"`` with an explicit ``threshold``.
    """
    img = check_image(image, square=False)
    if method == "fixed":
        if threshold is None:
            raise ValueError("fixed binarization needs a threshold")
        t = float(threshold)
    elif method == "otsu":
        if img.min() == img.max():
            raise ValueError("Otsu needs a non-constant image; use method='fixed'")
        # skimage's threshold separates with '>', nudge so '>=' agrees on ties
        t = np.nextafter(threshold_otsu(img, nbins=256), np.inf)
    else:
        raise ValueError(f"unknown binarization method {method!r}")
    return (img >= t).astype(np.uint8)


def _centers(G, extent):
    return (np.arange(G) + 0.5) * (extent / G) - extent / 2


def carve(silhouettes, G, cube_extent=1.0):
    """Intersect the visual cones of all views over a ``G**3`` voxel grid.

    A voxel survives iff its centre projects onto a foreground pixel in every
    view; projections outside the image count as background. ``silhouettes``
    may be a :class:`SilhouetteSet` or any sequence of ``(angle, mask)``.
    """
    views = silhouettes.views if isinstance(silhouettes, SilhouetteSet) else [(float(a), np.asarray(m).astype(bool)) for a, m in silhouettes]
    if not views:
        raise ValueError("carving needs at least one view")
    G = int(G)
    if G < 1:
        raise ValueError("G must be >= 1")
    E = float(cube_extent)
    if not E > 0:
        raise ValueError("cube_extent must be positive")
    n = views[0][1].shape[0]
    c = _centers(G, E)
    empty = tuple(a for a, m in views if not m.any())

    occ = np.zeros((G, G, G), dtype=bool)
    if empty:
        return VoxelGrid(G, E / G, occ, empty)

    cols = []
    padded = []
    for angle, mask in views:
        th = np.deg2rad(angle)
        u = c[None, :] * np.cos(th) + c[:, None] * np.sin(th)  # [y, x]
        col = np.floor((u + E / 2) / E * n).astype(np.int64)
        col[(col < 0) | (col >= n)] = n  # index of the padding column
        cols.append(col.ravel().astype(np.int32))
        padded.append(np.concatenate([mask, np.zeros((n, 1), dtype=bool)], axis=1))

    rows = np.floor((E / 2 - c) / E * n).astype(np.int64)  # per z
    for r in np.unique(rows):
        if not 0 <= r < n:
            continue
        alive = np.arange(G * G)
        for col, pm in zip(cols, padded):
            alive = alive[pm[r][col[alive]]]
            if alive.size == 0:
                break
        if alive.size == 0:
            continue
        layer = np.zeros(G * G, dtype=bool)
        layer[alive] = True
        occ[rows == r] = layer.reshape(G, G)
    return VoxelGrid(G, E / G, occ, ())


@dataclass(frozen=True)
class Sphere:
    r: float


@dataclass(frozen=True)
class Box:
    a: float  # along x
    b: float  # along y
    c: float  # along z


def synth_silhouettes(shape, angles, n, extent=1.0):
    """Exact orthographic silhouettes of a centred sphere or box.

    Pixels are foreground when their centre lies inside the projected shape.
    """
    E = float(extent)
    if isinstance(shape, Sphere):
        if not 0 < shape.r <= E / 2:
            raise ValueError("sphere radius must lie in (0, extent/2]")
    elif isinstance(shape, Box):
        if min(shape.a, shape.b, shape.c) <= 0 or shape.c > E or np.hypot(shape.a, shape.b) > E:
            raise ValueError("box does not fit inside the cube at every angle")
    else:
        raise TypeError(f"unsupported shape {shape!r}")
    centers = _centers(n, E)
    u = centers[None, :]
    v = -centers[:, None]  # row 0 is the top of the cube
    views = []
    for angle in angles:
        if isinstance(shape, Sphere):
            mask = u**2 + v**2 <= shape.r**2
        else:
            th = np.deg2rad(angle)
            half_w = (shape.a * abs(np.cos(th)) + shape.b * abs(np.sin(th))) / 2
            mask = (np.abs(u) <= half_w) & (np.abs(v) <= shape.c / 2)
        views.append((angle, mask.astype(np.uint8)))
    return SilhouetteSet(tuple(views))


def surface_voxels(occ):
    """Occupied voxels with at least one empty (or out-of-grid) 6-neighbour."""
    p = np.pad(occ, 1, constant_values=False)
    interior = p[:-2, 1:-1, 1:-1] & p[2:, 1:-1, 1:-1] & p[1:-1, :-2, 1:-1] & p[1:-1, 2:, 1:-1] & p[1:-1, 1:-1, :-2] & p[1:-1, 1:-1, 2:]
    return occ & ~interior


_CUBE_V = np.array([[x, y, z] for z in (0, 1) for y in (0, 1) for x in (0, 1)], dtype=float)
_CUBE_F = np.array(
    [
        [0, 2, 3], [0, 3, 1],  # z = 0
        [4, 5, 7], [4, 7, 6],  # z = 1
        [0, 1, 5], [0, 5, 4],  # y = 0
        [2, 6, 7], [2, 7, 3],  # y = 1
        [0, 4, 6], [0, 6, 2],  # x = 0
        [1, 3, 7], [1, 7, 5],  # x = 1
    ]
)


def obj_text(grid):
    """One closed cube mesh (8 vertices, 12 triangles) per surface voxel."""
    zs, ys, xs = np.nonzero(surface_voxels(grid.occupancy))
    lines = [f"# biwave voxels G={grid.G} pitch={grid.pitch!r}"]
    half = grid.extent / 2
    for k, (z, y, x) in enumerate(zip(zs, ys, xs)):
        verts = (_CUBE_V + [x, y, z]) * grid.pitch - half
        lines += [f"v {a:.6f} {b:.6f} {c:.6f}" for a, b, c in verts]
        base = 8 * k + 1
        lines += [f"f {a + base} {b + base} {c + base}" for a, b, c in _CUBE_F]
    return "\n".join(lines) + "\n"


def voxels_to_bytes(grid):
    header = _MAGIC + struct.pack("<Id", grid.G, grid.pitch)
    return header + np.packbits(grid.occupancy.ravel(), bitorder="little").tobytes()


def export_voxels(grid, path, format="raw"):
    """Write ``grid`` as packed raw occupancy (``"raw"``) or an OBJ mesh."""
    if format == "raw":
        atomic_write_bytes(path, voxels_to_bytes(grid))
    elif format == "obj":
        atomic_write_text(path, obj_text(grid))
    else:
        raise ValueError(f"unknown voxel format {format!r}")


def import_voxels(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 16 or data[:4] != _MAGIC:
        raise ValueError(f"{path}: not a BWVX voxel file")
    G, pitch = struct.unpack("<Id", data[4:16])
    nbits = G**3
    payload = np.frombuffer(data[16:], dtype=np.uint8)
    if payload.size != (nbits + 7) // 8:
        raise ValueError(f"{path}: payload size does not match G={G}")
    occ = np.unpackbits(payload, bitorder="little", count=nbits).astype(bool).reshape(G, G, G)
    return VoxelGrid(G, pitch, occ)


def read_manifest(path):
    """Load ``angle_degrees path`` lines; paths are relative to the manifest."""
    base = os.path.dirname(os.path.abspath(path))
    views = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(None, 1)
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'angle path'")
            img, _ = read_pgm(os.path.join(base, parts[1]))
            views.append((float(parts[0]), (img > 0).astype(np.uint8)))
    return SilhouetteSet(tuple(views))


def write_silhouettes(silhouettes, directory, stem="view"):
    """Write one 8-bit PGM per view plus ``manifest.txt``; returns its path."""
    os.makedirs(directory, exist_ok=True)
    lines = []
    for k, (angle, mask) in enumerate(silhouettes.views):
        name = f"{stem}_{k:03d}.pgm"
        write_pgm(os.path.join(directory, name), mask.astype(np.uint8) * 255)
        lines.append(f"{angle!r} {name}")
    manifest = os.path.join(directory, "manifest.txt")
    atomic_write_text(manifest, "\n".join(lines) + "\n")
    return manifest
