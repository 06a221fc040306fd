"""chirpfit: chirp signal parameter estimation under heavy-tailed noise."""

from .asymptotics import (
    gamma_inverse,
    gamma_matrix,
    hessian_limit_check,
    k_function,
    limiting_cf,
    limiting_cf_multi,
    scaling_d1,
    scaling_d2,
    scaling_delta1,
    scaling_delta2,
    tau,
    trig_limit_check,
    v_transform,
)
from .estimators import (
    DegenerateDesignError,
    EstimateRangeError,
    EstimationResult,
    alse_single,
    design_matrix,
    estimate_multi,
    lse_single,
    periodogram,
    profile_rss,
)
from .model import ChirpComponent, ChirpModel, SampleSeries, chirp_phase, rss, synthesize
from .montecarlo import (
    ExperimentConfig,
    ExperimentResult,
    SummaryTable,
    preset_model,
    rate_check,
    run_experiment,
    summarize,
)
from .noise import StableNoiseSpec, empirical_cf, sample_sas, theoretical_cf
from .optim import GridSpec, SimplexConfig, dechirp_scan, grid_search, interior_grid, nelder_mead

__version__ = "0.1.0"

__all__ = [
    "ChirpComponent",
    "ChirpModel",
    "SampleSeries",
    "chirp_phase",
    "synthesize",
    "rss",
    "StableNoiseSpec",
    "sample_sas",
    "empirical_cf",
    "theoretical_cf",
    "SimplexConfig",
    "GridSpec",
    "nelder_mead",
    "grid_search",
    "interior_grid",
    "dechirp_scan",
    "EstimationResult",
    "DegenerateDesignError",
    "EstimateRangeError",
    "design_matrix",
    "profile_rss",
    "periodogram",
    "lse_single",
    "alse_single",
    "estimate_multi",
    "scaling_d1",
    "scaling_d2",
    "scaling_delta1",
    "scaling_delta2",
    "gamma_matrix",
    "gamma_inverse",
    "k_function",
    "tau",
    "v_transform",
    "limiting_cf",
    "limiting_cf_multi",
    "trig_limit_check",
    "hessian_limit_check",
    "ExperimentConfig",
    "ExperimentResult",
    "SummaryTable",
    "summarize",
    "run_experiment",
    "rate_check",
    "preset_model",
]
