"""Threshold classification of parameter ensembles from posterior draws."""

__version__ = "0.1.0"

from .diagnostics import (
    DiagnosticsReport,
    UndefinedRateError,
    decomposition_check,
    diagnostics_report,
    posterior_tnr,
    posterior_tpr,
    richardson_rule,
)
from .ensemble import (
    ClassificationEstimate,
    DecisionConfig,
    DrawMatrix,
    EnsembleError,
    ExceedanceProfile,
    ecdf_at,
    exceedance_profile,
    quantile,
    upper_tail_quantile,
)
from .synthetic import ModelSpec, SyntheticDataset, analytic_optimal_labels, simulate
from .tcl import (
    RiskBreakdown,
    classify_by_probability,
    fn_indicator,
    fp_indicator,
    joint_enumeration_minimum,
    optimal_estimate,
    oracle_best_labels,
    posterior_risk,
    tcl_unweighted,
    tcl_weighted,
)

__all__ = [
    "ClassificationEstimate",
    "DecisionConfig",
    "DiagnosticsReport",
    "DrawMatrix",
    "EnsembleError",
    "ExceedanceProfile",
    "ModelSpec",
    "RiskBreakdown",
    "SyntheticDataset",
    "UndefinedRateError",
    "analytic_optimal_labels",
    "classify_by_probability",
    "decomposition_check",
    "diagnostics_report",
    "ecdf_at",
    "exceedance_profile",
    "fn_indicator",
    "fp_indicator",
    "joint_enumeration_minimum",
    "optimal_estimate",
    "oracle_best_labels",
    "posterior_risk",
    "posterior_tnr",
    "posterior_tpr",
    "quantile",
    "richardson_rule",
    "simulate",
    "tcl_unweighted",
    "tcl_weighted",
    "upper_tail_quantile",
    "__version__",
]
