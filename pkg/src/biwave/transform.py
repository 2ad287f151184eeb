"""Fast orthonormal Haar and Walsh-Hadamard transforms.

Coefficient layouts match :mod:`biwave.patterns`:

* row-major (M) family: ``c[0]`` is the DC term, level ``s`` occupies
  ``c[2**s : 2**(s+1)]`` ordered by shift;
* quadtree (Q) family: ``c[0]`` is DC, level ``s`` occupies
  ``c[4**s : 4**(s+1)]`` as three ``2**s x 2**s`` blocks (x-split, y-split,
  diagonal), each block row-major over (row, column) block position.

All transforms are O(N) or O(N log N) and never materialize a pattern matrix.
"""

import numpy as np

_SQRT2 = np.sqrt(2.0)


def haar1d_analyze(x):
    """Orthonormal 1D Haar coefficients of a length ``2**q`` signal."""
    a = np.asarray(x, dtype=float).ravel()
    N = a.size
    q = N.bit_length() - 1
    c = np.empty(N)
    for s in range(q - 1, -1, -1):
        even, odd = a[0::2], a[1::2]
        c[2**s : 2 ** (s + 1)] = (even - odd) / _SQRT2
        a = (even + odd) / _SQRT2
    c[0] = a[0]
    return c


def haar1d_synthesize(c, levels=None):
    """Inverse of :func:`haar1d_analyze`.

    If ``levels`` is given, only the DC term and the first ``levels`` wavelet
    levels are used and the result is the piecewise-constant partial
    reconstruction upsampled to full length.
    """
    c = np.asarray(c, dtype=float).ravel()
    N = c.size
    q = N.bit_length() - 1
    stop = q if levels is None else min(levels, q)
    a = c[:1].copy()
    for s in range(stop):
        d = c[2**s : 2 ** (s + 1)]
        nxt = np.empty(2 ** (s + 1))
        nxt[0::2] = (a + d) / _SQRT2
        nxt[1::2] = (a - d) / _SQRT2
        a = nxt
    if stop < q:
        # the 1/sqrt(2) per skipped level turns the approximation into block means
        a = np.repeat(a * 2.0 ** (-(q - stop) / 2.0), 2 ** (q - stop))
    return a


def haar2d_analyze(image):
    """Orthonormal separable 2D Haar coefficients in quadtree order."""
    a = np.asarray(image, dtype=float)
    n = a.shape[0]
    L = n.bit_length() - 1
    c = np.empty(n * n)
    for s in range(L - 1, -1, -1):
        tl, tr = a[0::2, 0::2], a[0::2, 1::2]
        bl, br = a[1::2, 0::2], a[1::2, 1::2]
        m2 = 4**s
        c[m2 : 2 * m2] = ((tl - tr + bl - br) / 2).ravel()
        c[2 * m2 : 3 * m2] = ((tl + tr - bl - br) / 2).ravel()
        c[3 * m2 : 4 * m2] = ((tl - tr - bl + br) / 2).ravel()
        a = (tl + tr + bl + br) / 2
    c[0] = a[0, 0]
    return c


def haar2d_synthesize(c, levels=None):
    """Inverse of :func:`haar2d_analyze`; ``levels`` truncates as in 1D."""
    c = np.asarray(c, dtype=float).ravel()
    n = int(round(np.sqrt(c.size)))
    L = n.bit_length() - 1
    stop = L if levels is None else min(levels, L)
    a = c[:1].reshape(1, 1).copy()
    for s in range(stop):
        m = 2**s
        m2 = m * m
        dx = c[m2 : 2 * m2].reshape(m, m)
        dy = c[2 * m2 : 3 * m2].reshape(m, m)
        dd = c[3 * m2 : 4 * m2].reshape(m, m)
        nxt = np.empty((2 * m, 2 * m))
        nxt[0::2, 0::2] = (a + dx + dy + dd) / 2
        nxt[0::2, 1::2] = (a - dx + dy - dd) / 2
        nxt[1::2, 0::2] = (a + dx - dy - dd) / 2
        nxt[1::2, 1::2] = (a - dx - dy + dd) / 2
        a = nxt
    if stop < L:
        f = 2 ** (L - stop)
        a = np.kron(a / f, np.ones((f, f)))
    return a


def fwht(x):
    """Unnormalized Walsh-Hadamard transform in natural (Sylvester) order.

    ``fwht(fwht(x)) == len(x) * x``.
    """
    a = np.array(x, dtype=float).ravel()
    N = a.size
    h = 1
    while h < N:
        a = a.reshape(-1, 2, h)
        top, bottom = a[:, 0, :].copy(), a[:, 1, :]
        a[:, 0, :] += bottom
        a[:, 1, :] = top - bottom
        a = a.reshape(N)
        h *= 2
    return a
