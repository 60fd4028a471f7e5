"""Gaussian processes parametrized by block-lower-triangular factors.

A process on ``T`` steps of dimension ``d`` is ``X = a + L G`` where ``G`` is
a vector of ``dT`` independent standard normals and ``L`` has ``d x d``
blocks ``L[t, s]`` that vanish for ``s > t``. Time indices in the public API
are 1-based, as in the usual mathematical notation.
"""

from dataclasses import dataclass, field

import numpy as np

from . import matcore
from .errors import (
    DimensionMismatch,
    DimensionNotMultiple,
    IndexOutOfRange,
    NonPositiveSigma,
    NotBlockLowerTriangular,
    NotPSD,
)


def _upper_block_mask(d, T):
    blk = np.triu(np.ones((T, T), dtype=bool), k=1)
    return np.kron(blk, np.ones((d, d), dtype=bool))


@dataclass(frozen=True, eq=False)
class LowerBlockFactor:
    """Block-lower-triangular ``dT x dT`` factor in full storage."""

    matrix: np.ndarray
    d: int = 1

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        if M.ndim == 0:
            M = M.reshape(1, 1)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionMismatch(f"factor must be square, got shape {M.shape}")
        d = int(self.d)
        if d < 1:
            raise DimensionMismatch("d must be >= 1")
        if M.shape[0] == 0 or M.shape[0] % d:
            raise DimensionNotMultiple(
                f"factor size {M.shape[0]} is not a positive multiple of d={d}"
            )
        T = M.shape[0] // d
        upper = _upper_block_mask(d, T)
        if np.any(M[upper] != 0.0):
            r, c = np.argwhere(upper & (M != 0.0))[0]
            raise NotBlockLowerTriangular(
                f"entry ({r}, {c}) lies in upper block ({r // d + 1}, {c // d + 1}) "
                "and must be 0"
            )
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "d", d)

    @property
    def T(self):
        return self.matrix.shape[0] // self.d

    @property
    def n(self):
        return self.matrix.shape[0]

    def block(self, t, s):
        """Block ``L[t, s]`` (1-based)."""
        d = self.d
        return self.matrix[(t - 1) * d : t * d, (s - 1) * d : s * d]

    def diagonal_blocks(self):
        """Array of shape (T, d, d) holding ``L[t, t]``."""
        d, T = self.d, self.T
        idx = np.arange(T)
        return self.matrix.reshape(T, d, T, d)[idx, :, idx, :]

    def rotate(self, O):
        """Right-multiply by a block-orthogonal matrix (same law, same class)."""
        blocks = O.blocks if isinstance(O, BlockOrthogonal) else np.asarray(O)
        return LowerBlockFactor(right_block_multiply(self.matrix, blocks, self.d), self.d)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    def __repr__(self):
        return f"LowerBlockFactor(d={self.d}, T={self.T})"


def right_block_multiply(M, blocks, d):
    """``M @ diag(blocks)`` without forming the block-diagonal matrix."""
    n = M.shape[0]
    T = blocks.shape[0]
    out = np.einsum("rtk,tkj->rtj", M.reshape(n, T, d), blocks)
    return out.reshape(n, n)


@dataclass(frozen=True, eq=False)
class BlockOrthogonal:
    """``T`` orthogonal ``d x d`` blocks, i.e. ``diag(O_1, ..., O_T)``."""

    blocks: np.ndarray

    def __post_init__(self):
        B = np.array(self.blocks, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1, 1)
        if B.ndim != 3 or B.shape[1] != B.shape[2]:
            raise DimensionMismatch(f"blocks must have shape (T, d, d), got {B.shape}")
        eye = np.eye(B.shape[1])
        for t, blk in enumerate(B, start=1):
            if np.linalg.norm(blk.T @ blk - eye) > 1e-10:
                raise ValueError(f"block {t} is not orthogonal")
        B.setflags(write=False)
        object.__setattr__(self, "blocks", B)

    @property
    def T(self):
        return self.blocks.shape[0]

    @property
    def d(self):
        return self.blocks.shape[1]

    def as_matrix(self):
        n = self.T * self.d
        out = np.zeros((n, n))
        for t, blk in enumerate(self.blocks):
            out[t * self.d : (t + 1) * self.d, t * self.d : (t + 1) * self.d] = blk
        return out

    @classmethod
    def identity(cls, d, T):
        return cls(np.broadcast_to(np.eye(d), (T, d, d)))

    @classmethod
    def random(cls, d, T, rng):
        """Haar-distributed blocks via QR of Gaussian matrices."""
        blocks = []
        for _ in range(T):
            Q, R = np.linalg.qr(rng.standard_normal((d, d)))
            blocks.append(Q * np.sign(np.diag(R)))
        return cls(np.array(blocks))


@dataclass(frozen=True, eq=False)
class GaussianProcess:
    mean: np.ndarray
    factor: LowerBlockFactor

    def __post_init__(self):
        a = np.array(self.mean, dtype=float).reshape(-1)
        if a.size != self.factor.n:
            raise DimensionMismatch(
                f"mean has length {a.size}, expected d*T = {self.factor.n}"
            )
        a.setflags(write=False)
        object.__setattr__(self, "mean", a)

    @classmethod
    def centered(cls, factor):
        return cls(np.zeros(factor.n), factor)

    @property
    def d(self):
        return self.factor.d

    @property
    def T(self):
        return self.factor.T


@dataclass(frozen=True)
class AR1Spec:
    """Time-varying AR(1): ``X_1 = s_1 G_1``, ``X_t = a_t X_{t-1} + s_t G_t``.

    ``alphas[0]`` is unused.
    """

    alphas: tuple = field(default=())
    sigmas: tuple = field(default=())

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        sigmas = tuple(float(s) for s in self.sigmas)
        if len(alphas) != len(sigmas):
            raise DimensionMismatch(
                f"alphas has length {len(alphas)} but sigmas has length {len(sigmas)}"
            )
        if not sigmas:
            raise DimensionMismatch("AR(1) spec needs T >= 1")
        for t, s in enumerate(sigmas):
            if not s > 0:
                raise NonPositiveSigma(f"sigmas[{t}] = {s} must be > 0")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "sigmas", sigmas)

    @classmethod
    def constant(cls, alpha, sigma, T):
        return cls((float(alpha),) * T, (float(sigma),) * T)

    @property
    def T(self):
        return len(self.sigmas)


def _check_time(L, t):
    if not 1 <= t <= L.T:
        raise IndexOutOfRange(f"time index t={t} outside 1..{L.T}")


def truncated_column(L, t):
    """Stack ``(L[t,t]; L[t+1,t]; ...; L[T,t])`` of shape ((T-t+1)d, d)."""
    _check_time(L, t)
    d = L.d
    return L.matrix[(t - 1) * d :, (t - 1) * d : t * d].copy()


def column_covariance(L, t):
    """Covariance contributed to ``(X_t, ..., X_T)`` by the noise ``G_t``."""
    col = truncated_column(L, t)
    return col @ col.T


def covariance(L):
    return L.matrix @ L.matrix.T


def gram_diagonal_blocks(L, M=None):
    """Diagonal blocks ``(M^T L)_{t,t}``, shape (T, d, d); ``M`` defaults to ``L``."""
    M = L if M is None else M
    d, T, n = L.d, L.T, L.n
    # einsum keeps a fixed summation order, so swapping L and M yields
    # exactly transposed blocks.
    return np.einsum(
        "rtk,rtj->tkj", M.matrix.reshape(n, T, d), L.matrix.reshape(n, T, d)
    )


def is_regular(L, tol=None):
    """True iff every ``(L^T L)_{t,t}`` is positive definite beyond ``tol``."""
    if tol is None:
        tol = 1e-10 * np.linalg.norm(L.matrix) ** 2
    blocks = gram_diagonal_blocks(L)
    smallest = np.linalg.eigvalsh(0.5 * (blocks + blocks.transpose(0, 2, 1)))[:, 0]
    return bool(np.all(smallest > tol))


def from_covariance(sigma, d=1):
    """Block-lower-triangular factor of a PSD covariance.

    Positive definite input goes straight to Cholesky. Singular input is
    factored block-row by block-row: the off-diagonal blocks solve the
    cross-covariance against the rows already built (least squares through
    a pseudo-inverse), and the diagonal block factors the Schur-complement
    residual.
    """
    sigma = matcore.check_symmetric(sigma, "sigma")
    n = sigma.shape[0]
    if n == 0 or n % d:
        raise DimensionNotMultiple(f"covariance size {n} is not a multiple of d={d}")
    fro = np.linalg.norm(sigma)
    w = np.linalg.eigvalsh(sigma)
    if w[0] < -matcore.INDEFINITE_RTOL * fro:
        raise NotPSD(f"covariance has eigenvalue {w[0]:.3e}")
    if w[0] > 1e-12 * max(fro, matcore.ABS_FLOOR):
        try:
            return LowerBlockFactor(np.linalg.cholesky(sigma), d)
        except np.linalg.LinAlgError:
            pass
    T = n // d
    L = np.zeros((n, n))
    for t in range(T):
        rows = slice(t * d, (t + 1) * d)
        prev = t * d
        S_tt = sigma[rows, rows]
        if prev:
            R = L[:prev, :prev]
            C = sigma[rows, :prev]
            X = C @ np.linalg.pinv(R.T, rcond=1e-10)
            L[rows, :prev] = X
            S_tt = S_tt - X @ X.T
        S_tt = 0.5 * (S_tt + S_tt.T)
        wt, Vt = np.linalg.eigh(S_tt)
        S_tt = (Vt * np.clip(wt, 0.0, None)) @ Vt.T
        L[rows, rows] = matcore.psd_factor(0.5 * (S_tt + S_tt.T), d)
    return LowerBlockFactor(L, d)


def _check_same_shape(L, M):
    if L.d != M.d:
        raise DimensionMismatch(f"d mismatch: {L.d} vs {M.d}")
    if L.T != M.T:
        raise DimensionMismatch(f"T mismatch: {L.T} vs {M.T}")


def classes_equal(L, M, tol=1e-8):
    """Whether ``L`` and ``M`` differ by a block-orthogonal rotation.

    Two factors define the same law iff all their column covariances agree.
    """
    _check_same_shape(L, M)
    for t in range(1, L.T + 1):
        A = column_covariance(L, t)
        B = column_covariance(M, t)
        if np.linalg.norm(A - B) > tol * max(1.0, np.linalg.norm(A)):
            return False
    return True


def canonicalize(L):
    """Class representative whose diagonal blocks are symmetric PSD.

    Block ``t`` of the rotation is the polar factor of ``L[t,t]^T``. For
    ``d = 1`` a zero diagonal entry falls back to the sign of the first
    nonzero entry below it, so scalar representatives are fully determined.
    """
    d = L.d
    diag = L.diagonal_blocks()
    if d == 1:
        signs = np.sign(diag[:, 0, 0])
        for t in np.flatnonzero(signs == 0):
            col = L.matrix[t:, t]
            nz = np.flatnonzero(col)
            signs[t] = np.sign(col[nz[0]]) if nz.size else 1.0
        blocks = signs.reshape(-1, 1, 1)
    else:
        blocks, _ = matcore.batched_polar(diag.transpose(0, 2, 1))
    out = right_block_multiply(L.matrix, blocks, d)
    # Diagonal blocks are symmetric by construction; remove round-off asymmetry.
    for t in range(L.T):
        sl = slice(t * d, (t + 1) * d)
        out[sl, sl] = 0.5 * (out[sl, sl] + out[sl, sl].T)
    return LowerBlockFactor(out, d)


def ar1_factor(spec):
    """Factor with entries ``L[t,s] = sigma_s * prod_{k=s+1}^{t} alpha_k``."""
    if not isinstance(spec, AR1Spec):
        spec = AR1Spec(*spec)
    T = spec.T
    alphas = np.asarray(spec.alphas)
    sigmas = np.asarray(spec.sigmas)
    L = np.zeros((T, T))
    for s in range(T):
        L[s, s] = sigmas[s]
        for t in range(s + 1, T):
            L[t, s] = L[t - 1, s] * alphas[t]
    return LowerBlockFactor(L, 1)
