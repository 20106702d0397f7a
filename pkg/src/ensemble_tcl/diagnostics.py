"""Posterior sensitivity/specificity of a classification and related checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ensemble import (
    ClassificationEstimate,
    DecisionConfig,
    DrawMatrix,
    EnsembleError,
    exceedance_profile,
)
from .tcl import _check_aligned, probability_rule

__all__ = [
    "DiagnosticsReport",
    "UndefinedRateError",
    "decomposition_check",
    "diagnostics_report",
    "posterior_tnr",
    "posterior_tpr",
    "richardson_rule",
]


class UndefinedRateError(EnsembleError):
    """A posterior rate has no mass in its denominator."""


@dataclass(frozen=True)
class DiagnosticsReport:
    """Rates are ``None`` when undefined (zero posterior mass on that side)."""

    tpr: Optional[float]
    tnr: Optional[float]
    fpr: Optional[float]
    fnr: Optional[float]
    mass_above: float
    mass_below: float
    expected_tcl: float
    decomposition_lhs: float
    decomposition_rhs: float

    @property
    def decomposition_gap(self) -> float:
        return abs(self.decomposition_lhs - self.decomposition_rhs)


def _side_counts(m: DrawMatrix, est: ClassificationEstimate, C: float):
    _check_aligned(m, est)
    prof = exceedance_profile(m, C)
    below = prof.counts_at_or_below
    above = m.S - below
    return est.labels_at(C), above, below


def _rate(hits: np.ndarray, mass: np.ndarray, name: str) -> float:
    # integer draw counts keep the ratio exact up to the final division
    denom = int(mass.sum())
    if denom == 0:
        raise UndefinedRateError(f"{name} undefined: no posterior mass on that side of C")
    return int(mass[hits].sum()) / denom


def posterior_tpr(m: DrawMatrix, est: ClassificationEstimate, C: float) -> float:
    """Posterior-mass-weighted share of above-C units that are labelled above."""
    labels, above, _ = _side_counts(m, est, C)
    return _rate(labels, above, "TPR")


def posterior_tnr(m: DrawMatrix, est: ClassificationEstimate, C: float) -> float:
    labels, _, below = _side_counts(m, est, C)
    return _rate(~labels, below, "TNR")


def _masses(above: np.ndarray, below: np.ndarray, S: int) -> tuple[float, float]:
    return int(above.sum()) / S, int(below.sum()) / S


def decomposition_check(
    m: DrawMatrix, est: ClassificationEstimate, cfg: DecisionConfig
) -> tuple[float, float]:
    """Both sides of E[TCL|y] = (FPR*mass_below + FNR*mass_above) / n.

    The left side is the unweighted expected TCL summed unit by unit; the
    right side goes through the posterior rates. ``cfg.weight`` is ignored,
    the identity concerns the unweighted loss. A side with zero posterior
    mass contributes zero whatever its (undefined) rate.
    """
    labels, above, below = _side_counts(m, est, cfg.threshold)
    S, n = m.S, m.n
    per_unit = np.where(labels, below / S, above / S)
    lhs = math.fsum(per_unit) / n
    mass_above, mass_below = _masses(above, below, S)
    rhs = 0.0
    if mass_below > 0:
        fpr = 1.0 - _rate(~labels, below, "TNR")
        rhs += fpr * mass_below / n
    if mass_above > 0:
        fnr = 1.0 - _rate(labels, above, "TPR")
        rhs += fnr * mass_above / n
    return lhs, rhs


def diagnostics_report(
    m: DrawMatrix, est: ClassificationEstimate, cfg: DecisionConfig
) -> DiagnosticsReport:
    labels, above, below = _side_counts(m, est, cfg.threshold)
    try:
        tpr = _rate(labels, above, "TPR")
    except UndefinedRateError:
        tpr = None
    try:
        tnr = _rate(~labels, below, "TNR")
    except UndefinedRateError:
        tnr = None
    mass_above, mass_below = _masses(above, below, m.S)
    lhs, rhs = decomposition_check(m, est, cfg)
    return DiagnosticsReport(
        tpr=tpr,
        tnr=tnr,
        fpr=None if tnr is None else 1.0 - tnr,
        fnr=None if tpr is None else 1.0 - tpr,
        mass_above=mass_above,
        mass_below=mass_below,
        expected_tcl=lhs,
        decomposition_lhs=lhs,
        decomposition_rhs=rhs,
    )


def richardson_rule(m: DrawMatrix, C_alpha: float, alpha: float) -> ClassificationEstimate:
    """Classify above when P[θ_i > C_alpha | y] > alpha.

    Estimates are the (1 - alpha)-quantiles, which sit on the same side of
    ``C_alpha`` as the labels.
    """
    return probability_rule(m, C_alpha, alpha)
