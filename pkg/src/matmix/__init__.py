"""Finite mixtures of skewed matrix variate distributions."""

from .ecm import FitError, FitOptions, FitReport, MixtureModel, fit, observed_loglik, run_ecm
from .matvar import ComponentParams, DistKind, ScaleMatrix, log_density
from .select import SelectionResult, ari, bic, icl, misclassification_rate, select_over_g
from .sim import preset_spec, simulate_dataset

__all__ = [
    "ComponentParams",
    "DistKind",
    "FitError",
    "FitOptions",
    "FitReport",
    "MixtureModel",
    "ScaleMatrix",
    "SelectionResult",
    "ari",
    "bic",
    "fit",
    "icl",
    "log_density",
    "misclassification_rate",
    "observed_loglik",
    "preset_spec",
    "run_ecm",
    "select_over_g",
    "simulate_dataset",
]
