"""Generative time-series engine.

Estimates the path-conditional drift of a bridge diffusion from sample
paths and simulates new paths that interpolate the empirical joint law,
plus reference models, distributional diagnostics, and a learned hedge.
"""
from .core import (Dataset, Path, RngStream, SimConfig, TimeGrid, ValidationError,
                   validate_dataset)
from .dataio import (format_float, read_dataset_csv, sha256_file, write_dataset_csv,
                     write_json)
from .drift import (DriftEstimator, ZeroWeightMass, biweight_kernel, log_f_factor,
                    quartic_kernel)
from .hedging import (HedgeConfig, HedgeResult, MlpPolicy, TrainingDiverged,
                      chronological_split, evaluate_hedger, init_policy, loss_and_grad,
                      pnl, pnl_values, policy_forward, train_hedger)
from .metrics import (MetricsReport, build_report, correlation_diff, hurst_estimate,
                      ks_two_sample, marginal_stats, quadratic_variation)
from .refmodels import (ArParams, CholeskyFailure, FbmParams, GarchParams, GbmParams,
                        fbm_covariance, sample_ar, sample_fbm, sample_garch,
                        sample_gaussian_onestep, sample_gbm, scaled_grid, unit_grid)
from .simulator import simulate_batch, simulate_path

__version__ = "0.1.0"

__all__ = [
    "TimeGrid", "Path", "Dataset", "SimConfig", "RngStream", "ValidationError",
    "validate_dataset",
    "DriftEstimator", "ZeroWeightMass", "quartic_kernel", "biweight_kernel",
    "log_f_factor",
    "simulate_path", "simulate_batch",
    "ArParams", "GarchParams", "FbmParams", "GbmParams", "CholeskyFailure",
    "unit_grid", "scaled_grid", "sample_ar", "sample_garch", "sample_fbm",
    "sample_gbm", "sample_gaussian_onestep", "fbm_covariance",
    "marginal_stats", "ks_two_sample", "quadratic_variation", "correlation_diff",
    "hurst_estimate", "MetricsReport", "build_report",
    "format_float", "write_dataset_csv", "read_dataset_csv", "write_json",
    "sha256_file",
    "MlpPolicy", "HedgeConfig", "HedgeResult", "TrainingDiverged", "init_policy",
    "policy_forward", "pnl", "pnl_values", "loss_and_grad", "train_hedger",
    "evaluate_hedger", "chronological_split",
    "__version__",
]
