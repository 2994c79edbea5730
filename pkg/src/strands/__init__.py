"""Ensemble variable selection for sparse linear models.

The central estimator clusters correlated predictors, explores the
model space by subsampling every cluster across many penalised fits,
and refits on an importance-weighted draw with the penalty restricted
to previously optimal levels. Plain pathwise lasso / elastic-net /
adaptive-lasso solvers, a random-lasso baseline, and a synthetic
benchmark harness are included.
"""

from .cluster import (MODE_CORRELATION, MODE_NONE, MODE_RANDOM, Clustering,
                      cluster_from_support, correlation_cluster,
                      median_abs_correlation, no_cluster, random_cluster)
from .data import Dataset, correlation_matrix, pearson, standardize
from .ensemble import (StrandsConfig, StrandsResult, step1_subset,
                       step_diagnostic, strands_fit, threshold_select)
from .errors import (ConstantColumn, DegenerateBootstrap, DegenerateGrid,
                     DegenerateWeights, DimensionMismatch, EmptyEnsemble,
                     NonConvergence, UnknownScenario)
from .rlasso import (RandomLassoConfig, RandomLassoResult, default_q_grid,
                     rlasso_fit)
from .seeding import SeedStream
from .simbench import (CovarianceSpec, MetricsReport, PredictionModel,
                       SimDraw, SimScenario, build_scenario, fit_method,
                       mse_population, prediction_error, run_experiment,
                       sample_dataset, selection_metrics, snr,
                       split_prediction_error)
from .solvers import (BaseLearner, CoefficientVector, CvConfig, FitResult,
                      LambdaGrid, PenaltySpec, SolverConfig,
                      adaptive_weights_from, cv_select, fit_at_lambda,
                      fit_path, kkt_residual, lambda_grid_auto,
                      penalized_objective)

__version__ = "0.1.0"

__all__ = [
    "BaseLearner", "Clustering", "CoefficientVector", "ConstantColumn",
    "CovarianceSpec", "CvConfig", "Dataset", "DegenerateBootstrap",
    "DegenerateGrid", "DegenerateWeights", "DimensionMismatch",
    "EmptyEnsemble", "FitResult", "LambdaGrid", "MetricsReport",
    "MODE_CORRELATION", "MODE_NONE", "MODE_RANDOM", "NonConvergence",
    "PenaltySpec", "PredictionModel", "RandomLassoConfig",
    "RandomLassoResult", "SeedStream", "SimDraw", "SimScenario",
    "SolverConfig", "StrandsConfig", "StrandsResult", "UnknownScenario",
    "adaptive_weights_from", "build_scenario", "cluster_from_support",
    "correlation_cluster", "correlation_matrix", "cv_select",
    "default_q_grid", "fit_at_lambda", "fit_method", "fit_path",
    "kkt_residual", "lambda_grid_auto", "median_abs_correlation",
    "mse_population", "no_cluster",
    "pearson", "penalized_objective", "prediction_error", "random_cluster",
    "rlasso_fit", "run_experiment", "sample_dataset", "selection_metrics",
    "snr", "split_prediction_error", "standardize", "step1_subset",
    "step_diagnostic", "strands_fit", "threshold_select",
]
