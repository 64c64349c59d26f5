"""Feature screening for right-censored survival data with a symmetrized revised xi correlation."""

__version__ = "0.1.0"

from .estimator import XimSisScreener, make_survival_target
from .experiment import DEFAULT_VARIANTS, ExperimentSpec, run_experiment, run_replication
from .impute import WeightedKNNImputer, knn_impute
from .metrics import ExperimentReport, ReplicationRecord, concordance, min_model_size, quantile, selection_proportions
from .rank_core import rank_vector, right_neighbors, xi_decompose, xi_nm
from .screening import MRule, ScreeningConfig, ScreeningResult, Threshold, TopD, omega_hat, screen
from .simgen import SimScenario, calibrate_censoring, generate, preset
from .survival import SurvivalResponse, censoring_rate, km_survival

__all__ = [
    "DEFAULT_VARIANTS",
    "ExperimentReport",
    "ExperimentSpec",
    "MRule",
    "ReplicationRecord",
    "ScreeningConfig",
    "ScreeningResult",
    "SimScenario",
    "SurvivalResponse",
    "Threshold",
    "TopD",
    "WeightedKNNImputer",
    "XimSisScreener",
    "calibrate_censoring",
    "censoring_rate",
    "concordance",
    "generate",
    "km_survival",
    "knn_impute",
    "make_survival_target",
    "min_model_size",
    "omega_hat",
    "preset",
    "quantile",
    "rank_vector",
    "right_neighbors",
    "run_experiment",
    "run_replication",
    "screen",
    "selection_proportions",
    "xi_decompose",
    "xi_nm",
]
