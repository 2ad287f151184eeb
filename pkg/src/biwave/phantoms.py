"""Deterministic binary test scenes with a requested duty ratio."""

import enum
from dataclasses import dataclass

import numpy as np

_GLYPHS = {
    "X": ["1...1", "1...1", ".1.1.", "..1..", ".1.1.", "1...1", "1...1"],
    "J": ["..111", "...1.", "...1.", "...1.", "1..1.", "1..1.", ".11.."],
    "T": ["11111", "..1..", "..1..", "..1..", "..1..", "..1..", "..1.."],
    "U": ["1...1", "1...1", "1...1", "1...1", "1...1", "1...1", ".111."],
    "H": ["1...1", "1...1", "1...1", "11111", "1...1", "1...1", "1...1"],
    "L": ["1....", "1....", "1....", "1....", "1....", "1....", "11111"],
    "E": ["11111", "1....", "1....", "1111.", "1....", "1....", "11111"],
    "F": ["11111", "1....", "1....", "1111.", "1....", "1....", "1...."],
    "V": ["1...1", "1...1", "1...1", "1...1", "1...1", ".1.1.", "..1.."],
    "Z": ["11111", "....1", "...1.", "..1..", ".1...", "1....", "11111"],
}
_DUTY_TOL = 0.10


class PhantomKind(enum.Enum):
    GLYPH = "glyph"
    DISK = "disk"
    BARS = "bars"
    RANDOM = "random"


@dataclass(frozen=True)
class Phantom:
    kind: PhantomKind
    duty_ratio: float
    n: int
    seed: int = 0
    text: str | None = None


def _bitmap(letter):
    return np.array([[ch == "1" for ch in row] for row in _GLYPHS[letter]], dtype=bool)


def _glyph_scene(p, rng):
    n = p.n
    if p.text is not None:
        letters = p.text.upper()
        unknown = set(letters) - set(_GLYPHS)
        if len(letters) != 4 or unknown:
            raise ValueError(f"glyph text must be 4 letters from {''.join(sorted(_GLYPHS))}")
    else:
        letters = "".join(rng.choice(sorted(_GLYPHS), size=4))
    cells = sum(int(_bitmap(c).sum()) for c in letters)
    target = p.duty_ratio * n * n
    best = None
    for cw in range(1, n // 26 + 1):
        for ch in range(1, n // 7 + 1):
            if not 0.25 <= cw / ch <= 4.0:
                continue
            err = abs(cells * cw * ch - target) / target
            if best is None or err < best[0]:
                best = (err, cw, ch)
    if best is None or best[0] > _DUTY_TOL:
        raise ValueError(f"duty ratio {p.duty_ratio} is not achievable with glyphs at n={n}")
    _, cw, ch = best
    width, height = 26 * cw, 7 * ch
    x0 = int(rng.integers(0, n - width + 1))
    y0 = int(rng.integers(0, n - height + 1))
    scene = np.zeros((n, n))
    for i, c in enumerate(letters):
        glyph = np.kron(_bitmap(c), np.ones((ch, cw), dtype=bool))
        x = x0 + i * 7 * cw
        scene[y0 : y0 + height, x : x + 5 * cw][glyph] = 1.0
    return scene


def generate_phantom(p):
    """Rasterize ``p`` into a binary ``n x n`` reflectance grid.

    Raises ValueError when the realized duty ratio would differ from the
    requested one by more than 10 % (relative).
    """
    kind = PhantomKind(p.kind)
    n = int(p.n)
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not 0.0 < p.duty_ratio < 1.0:
        raise ValueError(f"duty ratio must lie in (0, 1), got {p.duty_ratio}")
    rng = np.random.default_rng(p.seed)
    N = n * n
    if kind is PhantomKind.GLYPH:
        scene = _glyph_scene(p, rng)
    elif kind is PhantomKind.DISK:
        r = np.sqrt(p.duty_ratio * N / np.pi)
        c = np.arange(n) + 0.5 - n / 2
        scene = ((c[None, :] ** 2 + c[:, None] ** 2) <= r * r).astype(float)
    elif kind is PhantomKind.BARS:
        # best-matching period, preferring periods near n/8 on ties
        options = [(per, int(round(p.duty_ratio * per))) for per in range(2, max(3, n // 2 + 1))]
        options = [(per, w) for per, w in options if 1 <= w < per]
        if not options:
            raise ValueError(f"duty ratio {p.duty_ratio} is not achievable with bars at n={n}")
        period, width = min(options, key=lambda o: (abs(o[1] / o[0] - p.duty_ratio), abs(o[0] - n / 8)))
        cols = (np.arange(n) % period) < width
        scene = np.broadcast_to(cols, (n, n)).astype(float)
    else:
        count = int(round(p.duty_ratio * N))
        if not 1 <= count < N:
            raise ValueError(f"duty ratio {p.duty_ratio} is not achievable at n={n}")
        scene = np.zeros(N)
        scene[rng.permutation(N)[:count]] = 1.0
        scene = scene.reshape(n, n)
    actual = scene.mean()
    if abs(actual - p.duty_ratio) > _DUTY_TOL * p.duty_ratio:
        raise ValueError(f"realized duty ratio {actual:.4f} misses requested {p.duty_ratio}")
    return scene
