"""Panel regressions, Lasso selection and double-Lasso partial effects."""
from .basis import CORE, BasisSpec, PolynomialBasis, fit_basis
from .design import DesignBuilder, LinearSpec, weighted_mean, weighted_quantile
from .double_lasso import DoubleLassoResult, completion_matrix, double_lasso_ape
from .lasso import (CVPath, LassoResult, assign_folds, cv_lasso, cv_lasso_path, lambda_max,
                    lasso, penalty_grid)
from .ols import FitResult, f_test, first_difference, fit_spec, wls
from .panel import ALIASES, CORE_COLUMNS, Panel, write_csv
from .resample import cluster_resample

__all__ = [
    "CORE", "BasisSpec", "PolynomialBasis", "fit_basis", "DesignBuilder", "LinearSpec",
    "weighted_mean", "weighted_quantile", "DoubleLassoResult", "completion_matrix",
    "double_lasso_ape", "CVPath", "LassoResult", "assign_folds", "cv_lasso", "cv_lasso_path",
    "lambda_max", "lasso", "penalty_grid", "FitResult", "f_test", "first_difference",
    "fit_spec", "wls", "ALIASES", "CORE_COLUMNS", "Panel", "write_csv", "cluster_resample",
]
