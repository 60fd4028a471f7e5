"""Path simulation and second-order statistics.

Noise comes from ``numpy.random.Generator(PCG64(seed))`` via
``standard_normal``, which uses numpy's ziggurat sampler. Draws are fully
determined by ``(seed, n_paths, dT)`` for a given numpy version. The noise
matrix is drawn once and can be reused across processes so that several
processes are driven by the same realisation.
"""

import numpy as np

from .errors import DimensionNotScalar
from .process import covariance


def draw_noise(seed, n_paths, n):
    """``(n_paths, n)`` array of independent standard normals."""
    if int(n_paths) < 1:
        raise ValueError("n_paths must be >= 1")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    return rng.standard_normal((int(n_paths), int(n)))


def sample_paths(process, n_paths=None, seed=0, noise=None):
    """Rows ``a + L g`` for ``g`` drawn by :func:`draw_noise` or given as ``noise``."""
    n = process.factor.n
    if noise is None:
        noise = draw_noise(seed, n_paths, n)
    else:
        noise = np.asarray(noise, dtype=float)
        if noise.ndim != 2 or noise.shape[1] != n:
            raise ValueError(f"noise must have shape (n_paths, {n}), got {noise.shape}")
    return process.mean[None, :] + noise @ process.factor.matrix.T


def marginal_variances(L):
    """``Var(X_t)`` per step; for ``d > 1`` the trace of each diagonal block of ``L L^T``."""
    d, T = L.d, L.T
    return np.diag(covariance(L)).reshape(T, d).sum(axis=1)


def lag_covariance(L):
    """``Cov(X_1, X_t)`` for ``t = 1..T`` (scalar processes only)."""
    if L.d != 1:
        raise DimensionNotScalar(f"lag covariance needs d = 1, got d = {L.d}")
    return L.matrix[:, 0] * L.matrix[0, 0]


def empirical_covariance(paths):
    """Sample covariance of simulated paths (rows are paths)."""
    centered = paths - paths.mean(axis=0, keepdims=True)
    return centered.T @ centered / (paths.shape[0] - 1)
