"""Bi-frequency Haar-wavelet ghost imaging simulator."""

from .adaptive import AdaptivePolicy, run_adaptive, sampling_rate
from .carving import Box, SilhouetteSet, Sphere, VoxelGrid, binarize, carve, export_voxels, import_voxels, synth_silhouettes
from .estimators import GhostImager, HaarTransform, SpaceCarver
from .metrics import SsimParams, SweepResult, contrast, dynamic_range_sweep, ssim
from .optics import AcquisitionLog, BucketRecord, DetectorModel, Scene, acquire_full, calibrate_full_scale, measure, quantize, split_pattern
from .patterns import Basis, Pattern, PatternFamily, children_of, make_basis, mother_wavelet
from .phantoms import Phantom, PhantomKind, generate_phantom
from .recon import ReconstructedImage, correlation_reconstruct, dense_solve, hadamard_reconstruct, iwt_reconstruct, reconstruct

__version__ = "0.1.0"
