"""Dense symmetric / PSD matrix primitives.

Square roots go through a symmetric eigendecomposition. Eigenvalues that are
negative only by round-off are clipped to zero; anything more negative than
``-1e-8 * ||A||_F`` is rejected as indefinite.
"""

import numpy as np

from .errors import (
    DimensionMismatch,
    IndefiniteInput,
    NonSymmetric,
    RankExceeded,
)

SYM_RTOL = 1e-12
INDEFINITE_RTOL = 1e-8
RANK_RTOL = 1e-8
ABS_FLOOR = 1e-12


def _as_square(A, name="A"):
    A = np.asarray(A, dtype=float)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{name} must be a square matrix, got shape {A.shape}")
    return A


def check_symmetric(A, name="A"):
    A = _as_square(A, name)
    scale = max(1.0, np.linalg.norm(A))
    asym = np.max(np.abs(A - A.T)) if A.size else 0.0
    if asym > SYM_RTOL * scale:
        raise NonSymmetric(f"{name} is not symmetric (max |A - A^T| = {asym:.3e})")
    return A


def _clipped_eigh(A, name="A"):
    """Eigendecomposition of a symmetric matrix with round-off negatives clipped."""
    A = 0.5 * (A + A.T)
    w, V = np.linalg.eigh(A)
    fro = np.linalg.norm(A)
    if w.size and w[0] < -INDEFINITE_RTOL * fro:
        raise IndefiniteInput(
            f"{name} has eigenvalue {w[0]:.3e} below -{INDEFINITE_RTOL:g}*||{name}||_F"
        )
    # Numerical-rank cut: eigenvalues at the level of eigh round-off are zero.
    cut = max(w.size, 1) * np.finfo(float).eps * (np.max(np.abs(w)) if w.size else 0.0)
    w = np.where(w > cut, w, 0.0)
    return w, V


def psd_sqrt(A, check=True):
    """Unique PSD square root of a symmetric positive semi-definite matrix.

    Parameters
    ----------
    A : array_like, shape (n, n)
        Symmetric PSD matrix.
    check : bool
        Enforce the symmetry tolerance. Internal callers that symmetrize
        products themselves pass ``False``.

    Returns
    -------
    ndarray, shape (n, n)
        Symmetric ``B`` with ``B @ B == A`` up to round-off.
    """
    A = check_symmetric(A) if check else _as_square(A)
    w, V = _clipped_eigh(A)
    B = (V * np.sqrt(w)) @ V.T
    return 0.5 * (B + B.T)


def sqrt_trace(A):
    """tr(A^{1/2}) of a symmetric PSD matrix, from its clipped eigenvalues."""
    w, _ = _clipped_eigh(_as_square(A))
    return float(np.sum(np.sqrt(w)))


def bw_distance(A, B):
    """Bures-Wasserstein distance between two PSD covariance matrices.

    Computes ``sqrt(tr A + tr B - 2 tr((B^{1/2} A B^{1/2})^{1/2}))``; the
    inner product is symmetrized before its eigendecomposition and a
    radicand that is negative by round-off is clamped to zero.
    """
    A = check_symmetric(A, "A")
    B = check_symmetric(B, "B")
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes differ: {A.shape} vs {B.shape}")
    rB = psd_sqrt(B, check=False)
    C = rB @ A @ rB
    cross = sqrt_trace(0.5 * (C + C.T))
    trA, trB = float(np.trace(A)), float(np.trace(B))
    radicand = trA + trB - 2.0 * cross
    return float(np.sqrt(clamp_radicand(radicand)))


def clamp_radicand(radicand):
    # PSD inputs make the radicand nonnegative in exact arithmetic; only
    # round-off can push it below zero.
    return max(float(radicand), 0.0)


def procrustes_align(M):
    """Orthogonal maximizer of ``tr(M O^T)`` and the attained maximum.

    With ``M = U S V^T`` the maximizer is the polar factor ``O = U V^T`` and
    the maximum is the nuclear norm ``tr(S)``. For repeated or zero singular
    values any SVD is accepted, which picks one optimizer out of many.

    Returns
    -------
    O : ndarray, shape (d, d)
    nuclear : float
    """
    M = _as_square(M, "M")
    U, S, Vt = np.linalg.svd(M)
    return U @ Vt, float(np.sum(S))


def batched_polar(M):
    """Vectorized :func:`procrustes_align` over a stack of square blocks."""
    U, S, Vt = np.linalg.svd(M)
    return U @ Vt, S.sum(axis=-1)


def psd_factor(sigma, rank_cap):
    """Factor ``F`` (n x rank_cap) with ``F F^T = sigma``.

    Columns come from the top ``rank_cap`` eigenpairs in descending order.
    If ``n < rank_cap`` the trailing columns are zero.
    """
    sigma = check_symmetric(sigma, "sigma")
    rank_cap = int(rank_cap)
    if rank_cap < 1:
        raise ValueError("rank_cap must be a positive integer")
    n = sigma.shape[0]
    w, V = _clipped_eigh(sigma, "sigma")
    fro = np.linalg.norm(sigma)
    significant = int(np.sum(w > RANK_RTOL * fro)) if fro > 0 else 0
    if significant > rank_cap:
        raise RankExceeded(
            f"{significant} significant eigenvalues exceed rank_cap={rank_cap}"
        )
    order = np.argsort(w)[::-1][: min(rank_cap, n)]
    F = np.zeros((n, rank_cap))
    F[:, : order.size] = V[:, order] * np.sqrt(w[order])
    return F
