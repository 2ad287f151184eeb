"""Input validation helpers shared by the modules and estimators."""

import numbers

import numpy as np


def is_power_of_two(n):
    return isinstance(n, numbers.Integral) and n >= 1 and (n & (n - 1)) == 0


def check_power_of_two(n, name="n"):
    if not isinstance(n, numbers.Integral) or isinstance(n, bool):
        raise TypeError(f"{name} must be an integer, got {type(n).__name__}")
    if n < 2 or not is_power_of_two(n):
        raise ValueError(f"{name} must be a power of two >= 2, got {n}")
    return int(n)


def check_image(image, name="image", square=True):
    """Return ``image`` as a finite 2D float array."""
    arr = np.asarray(image, dtype=float)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"{name} must be a nonempty 2D array, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_scene(scene):
    """Validate a reflectance grid: square, finite, values in [0, 1]."""
    arr = check_image(getattr(scene, "reflectance", scene), name="scene")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("scene reflectance must lie in [0, 1]")
    return arr


def check_same_shape(a, b, names=("x", "y")):
    if a.shape != b.shape:
        raise ValueError(f"{names[0]} and {names[1]} differ in shape: {a.shape} vs {b.shape}")


def check_nonnegative(value, name):
    if not np.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a finite nonnegative number, got {value}")
    return float(value)
