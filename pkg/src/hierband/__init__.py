"""Convex banding of covariance matrices via a hierarchical group-lasso prox."""

from .matrix import (
    frobenius_dist,
    norm_2inf,
    norm_21,
    operator_dist,
    sample_covariance,
    subdiag_indices,
    subdiag_norm,
)
from .solver import (
    FitConfig,
    FitResult,
    NumericalError,
    fit,
    fit_simple,
    fixed_band,
    h_eval,
    lambda_diagonal,
    lambda_grid,
    lambda_max,
    path,
    reconstruct,
    solve_nu,
    taper_of,
)
from .weights import WeightScheme

__version__ = "0.1.0"
