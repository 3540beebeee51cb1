"""Chi-bar-squared weights for likelihood-ratio tests with parameters on the boundary."""

__version__ = "0.1.0"

from .structs import CovSpec, DeltaVector, PartitionSpec, WeightVector
from .conegeom import build_cone, face_masses, intrinsic_volumes, intrinsic_volumes_mc, project_cone
from .orthant import orthant_prob, orthant_prob_mc
from .mixture import MixtureDist, mixture_cdf, mixture_quantile
from .weights import (anisotropy_index, delta_orthogonal, rank_based_weights,
                      weights_orthogonal_nuisance, weights_orthogonal_point,
                      weights_theorem1_approx)
from .lansim import ExperimentConfig, DiagnosticsReport, run_experiment, simulate
from .covgen import CovGenSpec, gen_covariance

__all__ = [
    "CovSpec", "DeltaVector", "PartitionSpec", "WeightVector", "build_cone", "face_masses",
    "intrinsic_volumes", "intrinsic_volumes_mc", "project_cone", "orthant_prob",
    "orthant_prob_mc", "MixtureDist", "mixture_cdf", "mixture_quantile", "anisotropy_index",
    "delta_orthogonal", "rank_based_weights", "weights_orthogonal_nuisance",
    "weights_orthogonal_point", "weights_theorem1_approx", "ExperimentConfig",
    "DiagnosticsReport", "run_experiment", "simulate", "CovGenSpec", "gen_covariance",
]
