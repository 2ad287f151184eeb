"""File formats: binary PGM (P5), ``key = value`` sidecars, raw float grids.

Writers go through a temporary file in the destination directory and an
atomic rename, so a failed write never leaves a partial output behind.
"""

import os
import re
import tempfile

import numpy as np

from ._validation import check_image


def atomic_write_bytes(path, data):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode("utf-8"))


def format_metadata(meta):
    return "".join(f"{k} = {v}\n" for k, v in meta.items())


def parse_metadata(text, source="<metadata>"):
    """Parse ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ValueError(f"{source}:{lineno}: empty key")
        if key in out:
            raise ValueError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_metadata(path):
    with open(path, encoding="utf-8") as fh:
        return parse_metadata(fh.read(), source=os.fspath(path))


_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def read_pgm(path):
    """Read a binary (P5) PGM into an unsigned integer array.

    Returns ``(image, maxval)``. 16-bit data (maxval > 255) is big-endian.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    pos = 0
    fields = []
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise ValueError(f"{path}: malformed PGM header")
        fields.append(m.group(1))
        pos = m.end()
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {fields[0]!r})")
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError:
        raise ValueError(f"{path}: malformed PGM header") from None
    if width < 1 or height < 1 or not 1 <= maxval <= 65535:
        raise ValueError(f"{path}: invalid PGM dimensions or maxval")
    # exactly one whitespace byte separates the header from the raster
    pos += 1
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    expected = width * height * dtype.itemsize
    payload = data[pos : pos + expected]
    if len(payload) < expected:
        raise ValueError(f"{path}: truncated PGM payload ({len(payload)} of {expected} bytes)")
    img = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return img.astype(np.uint16 if maxval > 255 else np.uint8), maxval


def _pgm_bytes(img, maxval):
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n{maxval}\n".encode("ascii")
    dtype = ">u2" if maxval > 255 else "u1"
    return header + np.ascontiguousarray(img, dtype=dtype).tobytes()


def write_pgm(path, image, maxval=None):
    """Write a 2D image as binary PGM.

    Integer images are written as-is (maxval defaults to 255 or 65535 by
    range). Float images are mapped affinely from ``[min, max]`` onto
    ``[0, maxval]`` (default 65535) and the mapping is recorded in
    ``path + '.meta'``.
    """
    arr = np.asarray(image)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"image must be a nonempty 2D array, got shape {arr.shape}")
    if np.issubdtype(arr.dtype, np.integer) or arr.dtype == bool:
        arr = arr.astype(np.int64)
        if arr.min() < 0:
            raise ValueError("integer PGM data must be nonnegative")
        if maxval is None:
            maxval = 255 if arr.max() <= 255 else 65535
        if arr.max() > maxval or maxval > 65535:
            raise ValueError(f"pixel value exceeds maxval {maxval}")
        atomic_write_bytes(path, _pgm_bytes(arr, maxval))
        # a stale float-mapping sidecar would corrupt load_image
        stale = os.fspath(path) + ".meta"
        if os.path.exists(stale):
            os.remove(stale)
        return None
    arr = check_image(arr, square=False)
    maxval = 65535 if maxval is None else int(maxval)
    lo, hi = float(arr.min()), float(arr.max())
    span = hi - lo
    scaled = np.zeros(arr.shape) if span == 0 else (arr - lo) / span * maxval
    q = np.rint(scaled).astype(np.int64)
    meta = {"mapping": "affine", "min": repr(lo), "max": repr(hi), "maxval": str(maxval)}
    atomic_write_bytes(path, _pgm_bytes(q, maxval))
    atomic_write_text(os.fspath(path) + ".meta", format_metadata(meta))
    return meta


def load_image(path):
    """Read a PGM as floats.

    If an affine-mapping sidecar exists the original value range is restored,
    otherwise values are scaled to [0, 1] by maxval.
    """
    img, maxval = read_pgm(path)
    meta_path = os.fspath(path) + ".meta"
    if os.path.exists(meta_path):
        meta = read_metadata(meta_path)
        if meta.get("mapping") == "affine":
            lo, hi = float(meta["min"]), float(meta["max"])
            return lo + img.astype(float) / int(meta["maxval"]) * (hi - lo)
    return img.astype(float) / maxval


def write_raw_f64(path, image):
    """Little-endian float64 raster preceded by ``rows cols`` as two uint32."""
    arr = np.asarray(image, dtype="<f8")
    header = np.array(arr.shape, dtype="<u4").tobytes()
    atomic_write_bytes(path, header + arr.tobytes())


def read_raw_f64(path):
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 8:
        raise ValueError(f"{path}: truncated raw grid")
    rows, cols = np.frombuffer(data[:8], dtype="<u4")
    body = data[8:]
    if len(body) != int(rows) * int(cols) * 8:
        raise ValueError(f"{path}: payload size does not match {rows}x{cols}")
    return np.frombuffer(body, dtype="<f8").reshape(int(rows), int(cols)).copy()
