"""Image reconstruction from acquisition logs."""

from dataclasses import dataclass, field

import numpy as np

from .patterns import Basis, PatternFamily, random_mask
from .transform import fwht, haar1d_synthesize, haar2d_synthesize

_DENSE_MAX_SIDE = 32


@dataclass(frozen=True)
class ReconstructedImage:
    values: np.ndarray = field(repr=False)
    family: PatternFamily
    bits: int | None
    noise_sigma: float
    sampling_rate: float

    @property
    def n(self):
        return self.values.shape[0]


def _wrap(values, log):
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("reconstruction produced non-finite values")
    return ReconstructedImage(
        values=values,
        family=log.family,
        bits=log.detector.bits,
        noise_sigma=log.detector.noise_sigma,
        sampling_rate=log.measured_count / log.N,
    )


def _check_pair(log, basis, families):
    if log.family is not basis.family:
        raise ValueError(f"log family {log.family.name} does not match basis family {basis.family.name}")
    if basis.family not in families:
        raise ValueError(f"{basis.family.name} cannot be reconstructed here")
    if log.n != basis.n:
        raise ValueError(f"log side {log.n} does not match basis side {basis.n}")


def coefficients(log, basis):
    """Orthonormal coefficients ``w_j * b_j``; skipped or missing ``j`` give 0."""
    c = np.zeros(len(basis))
    c[log.j] = basis.weights[log.j] * log.b
    return c


def iwt_reconstruct(log, basis):
    """Inverse Haar synthesis of a (possibly pruned) Haar acquisition.

    Equivalent to ``sum_j w_j**2 * b_j * entries_j`` over measured patterns,
    computed level by level in O(N).
    """
    _check_pair(log, basis, (PatternFamily.ROW_MAJOR_M, PatternFamily.QUADTREE_Q))
    c = coefficients(log, basis)
    if basis.family is PatternFamily.ROW_MAJOR_M:
        values = haar1d_synthesize(c).reshape(basis.n, basis.n)
    else:
        values = haar2d_synthesize(c)
    return _wrap(values, log)


def hadamard_reconstruct(log, basis):
    """Invert a natural-order Hadamard acquisition: ``(1/N) H^T B``."""
    _check_pair(log, basis, (PatternFamily.HADAMARD,))
    b = np.zeros(basis.N)
    b[log.j] = log.b
    return _wrap((fwht(b) / basis.N).reshape(basis.n, basis.n), log)


def correlation_reconstruct(log, patterns):
    """Second-order correlation estimate ``<(B - <B>)(I - <I>)>`` for speckle.

    ``patterns`` is the random speckle :class:`Basis` the log was taken with;
    the ensemble average runs over the measured records.
    """
    if not isinstance(patterns, Basis) or patterns.family is not PatternFamily.RANDOM_SPECKLE:
        raise ValueError("correlation reconstruction needs the random speckle basis of the log")
    _check_pair(log, patterns, (PatternFamily.RANDOM_SPECKLE,))
    if log.measured_count < 2:
        raise ValueError("correlation reconstruction needs at least 2 records")
    n, N = patterns.n, patterns.N
    b = log.b - log.b.mean()
    acc = np.zeros(N)
    for j, bj in zip(log.j, b):
        mask = random_mask(patterns.seed, j, N)
        acc[mask] += bj
    # sum_r (B_r - <B>)(I_r - <I>) == sum_r (B_r - <B>) I_r, since sum_r (B_r - <B>) == 0
    values = acc / log.measured_count
    return _wrap(values.reshape(n, n), log)


def dense_solve(log, basis):
    """Solve the stacked pattern system directly; a test oracle for n <= 32.

    ``basis`` may also be an ``(N, n, n)`` array of pattern entries, which
    lets tests pose deliberately singular systems.
    """
    if log.skipped.size or log.measured_count != log.N:
        raise ValueError("dense_solve needs a complete log without skipped patterns")
    if isinstance(basis, Basis):
        if log.family is not basis.family:
            raise ValueError("log and basis families differ")
        M = basis.entries_matrix().astype(float)
        n = basis.n
    else:
        stack = np.asarray(basis, dtype=float)
        n = stack.shape[-1]
        M = stack.reshape(stack.shape[0], -1)
    if n > _DENSE_MAX_SIDE:
        raise ValueError(f"dense_solve is limited to n <= {_DENSE_MAX_SIDE}, got {n}")
    if M.shape[0] != M.shape[1] or M.shape[0] != log.measured_count:
        raise ValueError("the pattern system must be square and match the log")
    if np.linalg.matrix_rank(M) < M.shape[0]:
        raise ValueError("pattern system is singular")
    b = np.empty(M.shape[0])
    b[log.j] = log.b
    x = np.linalg.solve(M, b)
    return _wrap(x.reshape(n, n), log)


def reconstruct(log, basis=None):
    """Dispatch to the reconstructor matching the log's family."""
    basis = log.basis() if basis is None else basis
    if log.family.is_haar:
        return iwt_reconstruct(log, basis)
    if log.family is PatternFamily.HADAMARD:
        return hadamard_reconstruct(log, basis)
    return correlation_reconstruct(log, basis)
