"""Barycenters of Gaussian processes in the adapted Bures-Wasserstein geometry.

The objective ``sum_i w_i d_ABW(L, L_i)^2`` is minimized by alternating
between a Procrustes step (best block rotation of every input towards the
current iterate) and an averaging step (weighted mean of the rotated
inputs). That alternating scheme only guarantees a fixed point, and the
per-column problems are non-convex, so by default :func:`solve_fixed_point`
restarts it from a deterministic set of initial factors and keeps, column
by column, the best fixed point found. This is sound because the objective
is a sum of independent per-column terms.
"""

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import matcore
from .errors import (
    DimensionMismatch,
    DimensionNotScalar,
    InvalidWeights,
    SingularInput,
    TooManyProcesses,
)
from .metrics import abw_squared
from .process import LowerBlockFactor, canonicalize

WEIGHT_SUM_TOL = 1e-12
MAX_ORACLE_PROCESSES = 15


@dataclass(frozen=True, eq=False)
class BarycenterProblem:
    """Inputs ``L_i``, means ``a_i`` and convex weights ``w_i``."""

    factors: Sequence[LowerBlockFactor]
    weights: np.ndarray
    means: Optional[np.ndarray] = None

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise DimensionMismatch("a barycenter problem needs at least one process")
        d, T = factors[0].d, factors[0].T
        for i, L in enumerate(factors):
            if L.d != d:
                raise DimensionMismatch(f"factors[{i}] has d={L.d}, expected {d}")
            if L.T != T:
                raise DimensionMismatch(f"factors[{i}] has T={L.T}, expected {T}")
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.size != len(factors):
            raise InvalidWeights(f"{w.size} weights for {len(factors)} processes")
        if np.any(~(w > 0)):
            i = int(np.flatnonzero(~(w > 0))[0])
            raise InvalidWeights(f"weights[{i}] = {w[i]} must be > 0")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidWeights(f"weights sum to {w.sum()!r}, expected 1")
        n = d * T
        if self.means is None:
            means = np.zeros((len(factors), n))
        else:
            means = np.asarray(self.means, dtype=float)
            if means.shape != (len(factors), n):
                raise DimensionMismatch(
                    f"means must have shape ({len(factors)}, {n}), got {means.shape}"
                )
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", means)

    @classmethod
    def uniform(cls, factors, means=None):
        factors = tuple(factors)
        return cls(factors, np.full(len(factors), 1.0 / len(factors)), means)

    @classmethod
    def from_processes(cls, processes, weights=None):
        processes = list(processes)
        if weights is None:
            weights = np.full(len(processes), 1.0 / len(processes))
        return cls(
            [p.factor for p in processes],
            weights,
            np.array([p.mean for p in processes]),
        )

    @property
    def N(self):
        return len(self.factors)

    @property
    def d(self):
        return self.factors[0].d

    @property
    def T(self):
        return self.factors[0].T

    def stacked(self):
        return np.stack([L.matrix for L in self.factors])


@dataclass
class SolverConfig:
    """Stopping rule and initialization for the iterative solvers.

    ``tolerance=None`` means ``1e-10 * (1 + ||L0||_F)`` with ``L0`` the
    configured initial factor. ``init`` is ``"weighted-mean"``, the index of
    an input factor, or an explicit :class:`LowerBlockFactor`. With
    ``multistart=False`` the solver is the plain alternating scheme from
    ``init``.
    """

    tolerance: Optional[float] = None
    max_iterations: int = 10000
    init: Union[str, int, LowerBlockFactor] = "weighted-mean"
    multistart: bool = True

    def __post_init__(self):
        if self.tolerance is not None and not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if int(self.max_iterations) < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class SolverRun:
    start: str
    objective_trace: list
    iterations: int
    converged: bool
    objective: float


@dataclass
class BarycenterResult:
    factor: LowerBlockFactor
    mean: np.ndarray
    objective_trace: list
    iterations: int
    residual: float
    converged: bool
    objective: float = float("nan")
    tolerance: float = float("nan")
    runs: list = field(default_factory=list)
    signs: Optional[np.ndarray] = None

    def diagnostics(self):
        """JSON-ready summary of the solve."""
        out = {
            "iterations": int(self.iterations),
            "residual": float(self.residual),
            "converged": bool(self.converged),
            "objective": float(self.objective),
            "tolerance": float(self.tolerance),
            "objective_trace": [float(v) for v in self.objective_trace],
            "runs": [
                {
                    "start": r.start,
                    "iterations": int(r.iterations),
                    "converged": bool(r.converged),
                    "objective": float(r.objective),
                }
                for r in self.runs
            ],
        }
        if self.signs is not None:
            out["signs"] = self.signs.astype(int).tolist()
        return out


@dataclass
class ClassicalResult:
    covariance: np.ndarray
    iterations: int
    residual: float
    converged: bool
    jittered: list = field(default_factory=list)


def weighted_sum(arrays, weights):
    """Sum ``w_i * A_i`` accumulated in index order."""
    acc = None
    for w, A in zip(weights, arrays):
        acc = w * A if acc is None else acc + w * A
    return acc


def mean_barycenter(means, weights):
    """Weighted average ``sum_i w_i a_i`` of the means."""
    means = [np.asarray(m, dtype=float).reshape(-1) for m in means]
    if len(means) != len(weights):
        raise DimensionMismatch(f"{len(means)} means for {len(weights)} weights")
    lengths = {m.size for m in means}
    if len(lengths) != 1:
        raise DimensionMismatch(f"means have differing lengths {sorted(lengths)}")
    return weighted_sum(means, weights)


# --- alternating scheme on raw arrays ---------------------------------------


def _diag_gram(Ms, L, d, T):
    """``(M_i^T L)_{t,t}`` for every input, shape (N, T, d, d)."""
    N, n = Ms.shape[0], L.shape[0]
    return np.einsum("irtk,rtj->itkj", Ms.reshape(N, n, T, d), L.reshape(n, T, d))


def _rotations(Ms, L, d, T):
    G = _diag_gram(Ms, L, d, T)
    if d == 1:
        return np.where(G >= 0.0, 1.0, -1.0)
    O, _ = matcore.batched_polar(G)
    return O


def _rotate_all(Ms, O, d, T):
    N, n = Ms.shape[0], Ms.shape[1]
    return np.einsum("irtk,itkj->irtj", Ms.reshape(N, n, T, d), O).reshape(N, n, n)


def _column_objectives(L, Ms, weights, d, T):
    """Per-column contributions to ``sum_i w_i d_ABW(L, M_i)^2``."""
    n = L.shape[0]
    G = _diag_gram(Ms, L, d, T)
    nuc = np.linalg.svd(G, compute_uv=False).sum(axis=-1)  # (N, T)
    col_L = np.sum(L.reshape(n, T, d) ** 2, axis=(0, 2))
    col_M = np.sum(Ms.reshape(Ms.shape[0], n, T, d) ** 2, axis=(1, 3))
    per_input = col_L[None, :] + col_M - 2.0 * nuc
    return weighted_sum(per_input, weights)


def _alternate(L0, Ms, weights, d, T, tol, max_iter):
    """Plain alternating minimization; returns (L, trace, iterations, converged)."""
    L = np.array(L0, dtype=float)
    trace = []
    for k in range(1, max_iter + 1):
        O = _rotations(Ms, L, d, T)
        rotated = _rotate_all(Ms, O, d, T)
        trace.append(float(weighted_sum([np.sum((L - R) ** 2) for R in rotated], weights)))
        L_next = weighted_sum(rotated, weights)
        step = np.linalg.norm(L_next - L)
        L = L_next
        if step < tol:
            return L, trace, k, True
    return L, trace, max_iter, False


def _initial_factor(problem, init):
    if isinstance(init, LowerBlockFactor):
        if init.d != problem.d or init.T != problem.T:
            raise DimensionMismatch("initial factor has the wrong (d, T)")
        return "init", init.matrix
    if isinstance(init, str):
        if init != "weighted-mean":
            raise ValueError(f"unknown init {init!r}")
        return "weighted-mean", weighted_sum([L.matrix for L in problem.factors], problem.weights)
    k = int(init)
    if not 0 <= k < problem.N:
        raise ValueError(f"init index {k} outside 0..{problem.N - 1}")
    return f"input-{k + 1}", problem.factors[k].matrix


def _starts(problem, config):
    label, L0 = _initial_factor(problem, config.init)
    starts = [(label, L0)]
    if config.multistart:
        if label != "weighted-mean":
            starts.append(_initial_factor(problem, "weighted-mean"))
        for k in range(problem.N):
            lab = f"input-{k + 1}"
            if lab != label:
                starts.append((lab, problem.factors[k].matrix))
    return starts


def _default_tolerance(config, L0):
    if config.tolerance is not None:
        return float(config.tolerance)
    return 1e-10 * (1.0 + float(np.linalg.norm(L0)))


def _splice_best_columns(candidates, Ms, weights, d, T):
    """Assemble, column by column, the candidate with the smallest objective."""
    n = Ms.shape[1]
    objs = np.array([_column_objectives(L, Ms, weights, d, T) for L in candidates])
    scale = max(1.0, float(np.max(np.abs(objs))))
    out = np.zeros((n, n))
    for t in range(T):
        best = 0
        for j in range(1, len(candidates)):
            if objs[j, t] < objs[best, t] - 1e-12 * scale:
                best = j
        cols = slice(t * d, (t + 1) * d)
        out[:, cols] = candidates[best][:, cols]
    return out


def _finish(problem, L_bar, trace, iterations, tol, runs, converged):
    factor = canonicalize(LowerBlockFactor(L_bar, problem.d))
    residual = fixed_point_residual(factor, problem)
    ok = converged and residual <= tol * (1.0 + np.linalg.norm(factor.matrix))
    objective = float(
        weighted_sum([abw_squared(factor, Li) for Li in problem.factors], problem.weights)
    )
    return BarycenterResult(
        factor=factor,
        mean=mean_barycenter(problem.means, problem.weights),
        objective_trace=trace,
        iterations=iterations,
        residual=float(residual),
        converged=bool(ok),
        objective=objective,
        tolerance=tol,
        runs=runs,
    )


def solve_fixed_point(problem, config=None):
    """Adapted barycenter by alternating Procrustes / averaging steps.

    Each run iterates ``L <- sum_i w_i L_i O_i(L)`` until the Frobenius step
    drops below the tolerance. With ``config.multistart`` the scheme is also
    started from the weighted mean and from every input factor; the best
    column of each run is spliced together and the result is re-polished by
    one more run, whose fixed point is returned (canonicalized).

    Returns
    -------
    BarycenterResult
        ``objective_trace`` and ``iterations`` describe the run started from
        ``config.init``; every run is listed in ``runs``.
    """
    config = config or SolverConfig()
    d, T = problem.d, problem.T
    Ms = problem.stacked()
    w = problem.weights
    starts = _starts(problem, config)
    tol = _default_tolerance(config, starts[0][1])

    runs, finals = [], []
    all_converged = True
    for label, L0 in starts:
        L, trace, its, conv = _alternate(L0, Ms, w, d, T, tol, config.max_iterations)
        runs.append(SolverRun(label, trace, its, conv, float(np.sum(_column_objectives(L, Ms, w, d, T)))))
        finals.append(L)
        all_converged &= conv

    if len(finals) > 1:
        spliced = _splice_best_columns(finals, Ms, w, d, T)
        L, trace, its, conv = _alternate(spliced, Ms, w, d, T, tol, config.max_iterations)
        runs.append(SolverRun("spliced", trace, its, conv, float(np.sum(_column_objectives(L, Ms, w, d, T)))))
        final, converged = L, conv
    else:
        final, converged = finals[0], all_converged

    primary = runs[0]
    return _finish(problem, final, primary.objective_trace, primary.iterations, tol, runs, converged)


def _alternate_column(C0, cols, weights, tol, max_iter):
    """Alternating scheme restricted to one truncated column.

    ``cols`` has shape (N, m, d); returns (column, trace, iterations, converged).
    """
    X = np.array(C0, dtype=float)
    trace = []
    for k in range(1, max_iter + 1):
        G = np.einsum("irk,rj->ikj", cols, X)
        if cols.shape[2] == 1:
            O = np.where(G >= 0.0, 1.0, -1.0)
        else:
            O, _ = matcore.batched_polar(G)
        rotated = np.einsum("irk,ikj->irj", cols, O)
        trace.append(float(weighted_sum([np.sum((X - R) ** 2) for R in rotated], weights)))
        X_next = weighted_sum(rotated, weights)
        step = np.linalg.norm(X_next - X)
        X = X_next
        if step < tol:
            return X, trace, k, True
    return X, trace, max_iter, False


def _column_objective(X, cols, weights):
    G = np.einsum("irk,rj->ikj", cols, X)
    nuc = np.linalg.svd(G, compute_uv=False).sum(axis=-1)
    per = np.sum(X**2) + np.sum(cols**2, axis=(1, 2)) - 2.0 * nuc
    return float(weighted_sum(per, weights))


def solve_by_columns(problem, config=None):
    """Adapted barycenter solved as ``T`` independent truncated-column problems.

    Column ``t`` minimizes ``sum_i w_i min_O ||C - C_i O||_F^2`` over
    ``(T-t+1)d x d`` matrices ``C`` with the same alternating scheme and
    the same starts as :func:`solve_fixed_point`, keeping the best start per
    column. The columns are then placed back into a factor. Columns are
    solved one after another; the result does not depend on thread count.
    """
    config = config or SolverConfig()
    d, T, n = problem.d, problem.T, problem.d * problem.T
    Ms = problem.stacked()
    w = problem.weights
    starts = _starts(problem, config)
    tol = _default_tolerance(config, starts[0][1])
    col_tol = tol / np.sqrt(T)

    L_bar = np.zeros((n, n))
    primary_traces = []
    converged = True
    iterations = 0
    runs = []
    for t in range(T):
        rows, cols_sl = slice(t * d, n), slice(t * d, (t + 1) * d)
        cols = Ms[:, rows, cols_sl]
        best_X, best_obj = None, np.inf
        for j, (label, L0) in enumerate(starts):
            X, trace, its, conv = _alternate_column(
                L0[rows, cols_sl], cols, w, col_tol, config.max_iterations
            )
            obj = _column_objective(X, cols, w)
            if j == 0:
                primary_traces.append(trace)
                iterations = max(iterations, its)
            if best_X is None or obj < best_obj - 1e-12 * max(1.0, abs(best_obj)):
                best_X, best_obj, best_conv = X, obj, conv
            runs.append(SolverRun(f"column-{t + 1}:{label}", trace, its, conv, obj))
        L_bar[rows, cols_sl] = best_X
        converged &= best_conv

    # Total objective of the primary start, holding finished columns at their last value.
    length = max(len(tr) for tr in primary_traces)
    trace = [
        float(sum(tr[min(k, len(tr) - 1)] for tr in primary_traces)) for k in range(length)
    ]
    return _finish(problem, L_bar, trace, iterations, tol, runs, converged)


def fixed_point_residual(candidate, problem):
    """``||L - sum_i w_i L_i O_i(L)||_F`` with optimal block rotations ``O_i``."""
    if candidate.d != problem.d or candidate.T != problem.T:
        raise DimensionMismatch(
            f"candidate has (d, T) = ({candidate.d}, {candidate.T}), "
            f"problem has ({problem.d}, {problem.T})"
        )
    d, T = problem.d, problem.T
    Ms = problem.stacked()
    O = _rotations(Ms, candidate.matrix, d, T)
    image = weighted_sum(_rotate_all(Ms, O, d, T), problem.weights)
    return float(np.linalg.norm(candidate.matrix - image))


def barycenter_objective(candidate, problem):
    return float(
        weighted_sum([abw_squared(candidate, Li) for Li in problem.factors], problem.weights)
    )


def classical_bw_barycenter(covariances, weights, config=None):
    """Classical Bures-Wasserstein barycenter of positive definite covariances.

    Iterates ``S <- S^{-1/2} (sum_i w_i (S^{1/2} C_i S^{1/2})^{1/2})^2 S^{-1/2}``
    from the weighted arithmetic mean until the fixed-point residual
    ``||S - sum_i w_i (S^{1/2} C_i S^{1/2})^{1/2}||_F`` is at most
    ``tolerance * (1 + ||S||_F)`` (default tolerance ``1e-10``).

    A numerically singular input gets a jitter of ``1e-10`` times the mean
    trace on its diagonal; if that does not make it positive definite,
    :class:`SingularInput` is raised.
    """
    config = config or SolverConfig()
    tol = 1e-10 if config.tolerance is None else float(config.tolerance)
    covs = [matcore.check_symmetric(C, f"covariances[{i}]") for i, C in enumerate(covariances)]
    if not covs:
        raise DimensionMismatch("need at least one covariance")
    shape = covs[0].shape
    for i, C in enumerate(covs):
        if C.shape != shape:
            raise DimensionMismatch(f"covariances[{i}] has shape {C.shape}, expected {shape}")
    weights = np.asarray(weights, dtype=float)
    if weights.size != len(covs):
        raise InvalidWeights(f"{weights.size} weights for {len(covs)} covariances")
    if np.any(~(weights > 0)) or abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise InvalidWeights("weights must be positive and sum to 1")

    eps = 1e-10 * float(np.mean([np.trace(C) for C in covs]))
    jittered = []
    for i, C in enumerate(covs):
        C = 0.5 * (C + C.T)
        if np.linalg.eigvalsh(C)[0] <= 1e-10 * np.linalg.norm(C):
            C = C + eps * np.eye(shape[0])
            if not np.linalg.eigvalsh(C)[0] > 0:
                raise SingularInput(f"covariances[{i}] is singular beyond jitter repair")
            jittered.append(i)
        covs[i] = C

    S = weighted_sum(covs, weights)
    residual = np.inf
    for k in range(1, int(config.max_iterations) + 1):
        lam, V = np.linalg.eigh(S)
        lam = np.clip(lam, 0.0, None)
        root = (V * np.sqrt(lam)) @ V.T
        M = weighted_sum([matcore.psd_sqrt(root @ C @ root, check=False) for C in covs], weights)
        residual = float(np.linalg.norm(S - M))
        if residual <= tol * (1.0 + np.linalg.norm(S)):
            return ClassicalResult(S, k, residual, True, jittered)
        inv_root = (V / np.sqrt(lam)) @ V.T
        S = inv_root @ M @ M @ inv_root
        S = 0.5 * (S + S.T)
    return ClassicalResult(S, int(config.max_iterations), residual, False, jittered)


def sign_oracle_1d(problem):
    """Exact barycenter for ``d = 1`` by enumerating sign vectors per column.

    For each column the sign vector maximizing ``||sum_i w_i s_i C_i||^2`` is
    chosen among the ``2^(N-1)`` vectors with ``s_1 = +1``. Ties go to the
    lexicographically smallest vector (``-1 < +1``).
    """
    if problem.d != 1:
        raise DimensionNotScalar(f"sign oracle needs d = 1, got d = {problem.d}")
    N, T = problem.N, problem.T
    if N > MAX_ORACLE_PROCESSES:
        raise TooManyProcesses(f"N = {N} exceeds {MAX_ORACLE_PROCESSES}")
    Ms = problem.stacked()
    w = problem.weights
    signs = np.array([(1.0,) + tail for tail in itertools.product([-1.0, 1.0], repeat=N - 1)])
    L_bar = np.zeros((T, T))
    chosen = np.zeros((T, N))
    for t in range(T):
        cols = Ms[:, t:, t]  # (N, T - t)
        values = (signs * w) @ cols
        norms = np.sum(values**2, axis=1)
        top = norms.max()
        best = int(np.flatnonzero(norms >= top - 1e-12 * max(1.0, top))[0])
        L_bar[t:, t] = values[best]
        chosen[t] = signs[best]
    factor = canonicalize(LowerBlockFactor(L_bar, 1))
    objective = barycenter_objective(factor, problem)
    return BarycenterResult(
        factor=factor,
        mean=mean_barycenter(problem.means, w),
        objective_trace=[objective],
        iterations=0,
        residual=fixed_point_residual(factor, problem),
        converged=True,
        objective=objective,
        signs=chosen,
    )


def is_ar1(L, tol=1e-9):
    """Whether a scalar factor has AR(1) structure.

    An AR(1) factor has ratios ``L[t, s] / L[t-1, s]`` that do not depend on
    ``s < t``. Ratios are only formed where ``|L[t-1, s]| > tol``.
    """
    if L.d != 1:
        raise DimensionNotScalar(f"AR(1) test needs d = 1, got d = {L.d}")
    A = L.matrix
    for t in range(1, L.T):
        prev = A[t - 1, :t]
        ok = np.abs(prev) > tol
        if not np.any(ok):
            continue
        ratios = A[t, :t][ok] / prev[ok]
        ref = ratios[0]
        if np.any(np.abs(ratios - ref) > tol * max(1.0, abs(ref))):
            return False
    return True
