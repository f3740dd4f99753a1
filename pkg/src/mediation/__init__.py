"""Causal mediation analysis with multiple exposures, multivariate mediators,
and linear, logistic or Cox outcome models."""

from .dataset import (
    Binary,
    ColumnRoles,
    Continuous,
    Dataset,
    Intervention,
    Survival,
    default_intervention,
    load_csv,
    write_csv,
)
from .effects import (
    AnalysisConfig,
    CounterfactualTriple,
    EffectEstimate,
    effects_from_triple,
    estimate_triple,
    mediation_analysis,
)
from .glm import fit_linear, fit_logistic, fit_mediators
from .inference import BootstrapResult, bootstrap_effects, quantile_ci
from .survival import fit_cox, restricted_mean, survival_curve

__version__ = "0.1.0"
