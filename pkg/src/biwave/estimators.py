"""scikit-learn compatible wrappers.

Images travel as flattened rows (``n_samples x n*n``) so the estimators drop
into pipelines and model-selection utilities.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_power_of_two
from .adaptive import AdaptivePolicy, run_adaptive
from .carving import binarize, carve
from .metrics import ssim, SsimParams
from .optics import DetectorModel, acquire_full
from .patterns import PatternFamily, make_basis
from .recon import reconstruct
from .transform import haar1d_analyze, haar1d_synthesize, haar2d_analyze, haar2d_synthesize


def _side_from_features(n_features):
    n = int(round(np.sqrt(n_features)))
    if n * n != n_features:
        raise ValueError(f"{n_features} features do not form a square image")
    return n


class HaarTransform(TransformerMixin, BaseEstimator):
    """Orthonormal Haar coefficients of flattened square images.

    Parameters
    ----------
    family : {"m", "q"}
        Row-major 1D layout or quadtree 2D layout.
    """

    def __init__(self, family="m"):
        self.family = family

    def fit(self, X, y=None):
        X = check_array(X)
        fam = PatternFamily.parse(self.family)
        if not fam.is_haar:
            raise ValueError("HaarTransform needs family 'm' or 'q'")
        self.n_features_in_ = X.shape[1]
        self.side_ = check_power_of_two(_side_from_features(X.shape[1]), "image side")
        self.family_ = fam
        return self

    def _check(self, X):
        check_is_fitted(self)
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X

    def transform(self, X):
        X = self._check(X)
        if self.family_ is PatternFamily.ROW_MAJOR_M:
            return np.stack([haar1d_analyze(row) for row in X])
        n = self.side_
        return np.stack([haar2d_analyze(row.reshape(n, n)) for row in X])

    def inverse_transform(self, X):
        X = self._check(X)
        if self.family_ is PatternFamily.ROW_MAJOR_M:
            return np.stack([haar1d_synthesize(row) for row in X])
        return np.stack([haar2d_synthesize(row).ravel() for row in X])


class GhostImager(TransformerMixin, BaseEstimator):
    """Simulated single-pixel imager.

    ``transform`` acquires each scene row with the chosen pattern family and
    detector, then returns the reconstruction. ``score`` is the mean SSIM of
    the reconstructions against the input scenes.
    """

    def __init__(self, family="m", bits=None, noise_sigma=0.0, gain="global", full_scale=None,
                 adaptive=False, coeff_threshold=0.0, region_threshold=0.0, seed=0):
        self.family = family
        self.bits = bits
        self.noise_sigma = noise_sigma
        self.gain = gain
        self.full_scale = full_scale
        self.adaptive = adaptive
        self.coeff_threshold = coeff_threshold
        self.region_threshold = region_threshold
        self.seed = seed

    def fit(self, X, y=None):
        X = check_array(X)
        n = _side_from_features(X.shape[1])
        self.n_features_in_ = X.shape[1]
        self.basis_ = make_basis(self.family, n, seed=self.seed)
        if self.adaptive and not self.basis_.family.is_haar:
            raise ValueError("adaptive acquisition needs a Haar family")
        self.detector_ = DetectorModel(self.bits, self.full_scale, self.noise_sigma, self.seed, self.gain)
        return self

    def transform(self, X):
        check_is_fitted(self)
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        n = self.basis_.n
        out = np.empty_like(X, dtype=float)
        self.logs_ = []
        for i, row in enumerate(X):
            scene = row.reshape(n, n)
            if self.adaptive:
                policy = AdaptivePolicy(self.coeff_threshold, self.region_threshold)
                img, log = run_adaptive(scene, self.basis_, self.detector_, policy)
            else:
                log = acquire_full(scene, self.basis_, self.detector_)
                img = reconstruct(log, self.basis_)
            self.logs_.append(log)
            out[i] = img.values.ravel()
        self.sampling_rates_ = np.array([log.measured_count / log.N for log in self.logs_])
        return out

    def score(self, X, y=None):
        X = check_array(X)
        rec = self.transform(X)
        n = self.basis_.n
        scores = []
        for truth, est in zip(X, rec):
            span = truth.max() - truth.min()
            params = SsimParams(L=span if span > 0 else 1.0, size=min(11, n))
            scores.append(ssim(est.reshape(n, n), truth.reshape(n, n), params))
        return float(np.mean(scores))


class SpaceCarver(BaseEstimator):
    """Visual-hull reconstruction from a stack of turntable images.

    ``fit(X, y)`` takes ``X`` of shape ``(views, n, n)`` (grey images, binarized
    internally) and ``y`` the view angles in degrees. ``predict`` reports
    occupancy at world points of shape ``(m, 3)``.
    """

    def __init__(self, resolution=128, extent=1.0, method="otsu", threshold=None):
        self.resolution = resolution
        self.extent = extent
        self.method = method
        self.threshold = threshold

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        angles = np.asarray(y, dtype=float).ravel()
        if X.ndim != 3 or X.shape[0] != angles.size:
            raise ValueError("X must be (views, n, n) with one angle per view")
        masks = [binarize(img, self.method, self.threshold) for img in X]
        self.grid_ = carve(list(zip(angles, masks)), self.resolution, self.extent)
        self.volume_ = self.grid_.volume
        return self

    def predict(self, X):
        check_is_fitted(self)
        pts = check_array(X)
        if pts.shape[1] != 3:
            raise ValueError("points must have 3 coordinates")
        g = self.grid_
        idx = np.floor((pts + g.extent / 2) / g.pitch).astype(np.int64)
        inside = np.all((idx >= 0) & (idx < g.G), axis=1)
        out = np.zeros(len(pts), dtype=bool)
        i = idx[inside]
        out[inside] = g.occupancy[i[:, 2], i[:, 1], i[:, 0]]
        return out
