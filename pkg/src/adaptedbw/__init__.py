"""Adapted Bures-Wasserstein distances and barycenters of Gaussian processes."""

from .barycenter import (
    BarycenterProblem,
    BarycenterResult,
    ClassicalResult,
    SolverConfig,
    classical_bw_barycenter,
    fixed_point_residual,
    is_ar1,
    mean_barycenter,
    sign_oracle_1d,
    solve_by_columns,
    solve_fixed_point,
)
from .matcore import bw_distance, procrustes_align, psd_factor, psd_sqrt
from .metrics import abw_distance, abw_optimal_rotation, abw_via_columns, aw2_distance
from .process import (
    AR1Spec,
    BlockOrthogonal,
    GaussianProcess,
    LowerBlockFactor,
    ar1_factor,
    canonicalize,
    classes_equal,
    column_covariance,
    covariance,
    from_covariance,
    is_regular,
    truncated_column,
)
from .simulate import draw_noise, lag_covariance, marginal_variances, sample_paths

__version__ = "0.1.0"

__all__ = [
    "AR1Spec",
    "BarycenterProblem",
    "BarycenterResult",
    "BlockOrthogonal",
    "ClassicalResult",
    "GaussianProcess",
    "LowerBlockFactor",
    "SolverConfig",
    "abw_distance",
    "abw_optimal_rotation",
    "abw_via_columns",
    "ar1_factor",
    "aw2_distance",
    "bw_distance",
    "canonicalize",
    "classes_equal",
    "classical_bw_barycenter",
    "column_covariance",
    "covariance",
    "draw_noise",
    "fixed_point_residual",
    "from_covariance",
    "is_ar1",
    "is_regular",
    "lag_covariance",
    "marginal_variances",
    "mean_barycenter",
    "procrustes_align",
    "psd_factor",
    "psd_sqrt",
    "sample_paths",
    "sign_oracle_1d",
    "solve_by_columns",
    "solve_fixed_point",
    "truncated_column",
]
