"""Threshold classification losses and their Bayes-optimal estimators.

For a cut-off ``C`` and weight ``p``, TCL_p charges ``p`` per false positive
and ``1 - p`` per false negative, averaged over the ensemble. Its posterior
expected value splits unit by unit, which is what both the quantile
estimator and the brute-force oracles below rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .ensemble import (
    ClassificationEstimate,
    DecisionConfig,
    DrawMatrix,
    EnsembleError,
    exceedance_profile,
    matrix_upper_tail_quantiles,
)

__all__ = [
    "RiskBreakdown",
    "classify_by_probability",
    "fn_indicator",
    "fp_indicator",
    "joint_enumeration_minimum",
    "optimal_estimate",
    "oracle_best_labels",
    "posterior_risk",
    "tcl_unweighted",
    "tcl_weighted",
]

# 2**n joint labelings are enumerated only up to this many units.
MAX_ENUMERATION_UNITS = 16


def fp_indicator(C: float, theta: float, theta_est: float) -> int:
    return int(theta <= C and theta_est > C)


def fn_indicator(C: float, theta: float, theta_est: float) -> int:
    return int(theta > C and theta_est <= C)


def _paired(truth: Sequence[float], est: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(truth, dtype=float)
    e = np.asarray(est, dtype=float)
    if t.ndim != 1 or e.ndim != 1 or t.size != e.size:
        raise EnsembleError(
            f"truth and estimates must be vectors of equal length, "
            f"got {t.shape} and {e.shape}"
        )
    if t.size == 0:
        raise EnsembleError("empty parameter ensemble")
    return t, e


def tcl_weighted(C: float, truth: Sequence[float], est: Sequence[float], p: float) -> float:
    """p-weighted threshold classification loss, a value in [0, 1]."""
    t, e = _paired(truth, est)
    if not 0.0 <= p <= 1.0:
        raise EnsembleError(f"weight must lie in [0, 1], got {p}")
    fp = (t <= C) & (e > C)
    fn = (t > C) & (e <= C)
    return math.fsum(np.where(fp, p, 0.0) + np.where(fn, 1.0 - p, 0.0)) / t.size


def tcl_unweighted(C: float, truth: Sequence[float], est: Sequence[float]) -> float:
    t, e = _paired(truth, est)
    errors = ((t <= C) & (e > C)) | ((t > C) & (e <= C))
    return int(np.count_nonzero(errors)) / t.size


@dataclass(frozen=True)
class RiskBreakdown:
    """Posterior expected TCL_p, per unit and averaged."""

    unit_ids: tuple[str, ...]
    per_unit_risk: np.ndarray
    total_risk: float
    config: DecisionConfig


def _check_aligned(m: DrawMatrix, est: ClassificationEstimate) -> None:
    if est.unit_ids != m.unit_ids:
        missing = sorted(set(m.unit_ids) ^ set(est.unit_ids))
        if missing:
            raise EnsembleError(f"unit ids do not match: {missing[:5]}")
        raise EnsembleError("unit ids are in a different order")


def posterior_risk(
    m: DrawMatrix, est: ClassificationEstimate, cfg: DecisionConfig
) -> RiskBreakdown:
    _check_aligned(m, est)
    prof = exceedance_profile(m, cfg.threshold)
    # complementary count keeps P[θ>C] exact rather than 1 - P[θ<=C]
    per_unit = np.where(
        est.labels_at(cfg.threshold),
        cfg.weight * prof.prob_at_or_below,
        (1.0 - cfg.weight) * prof.prob_above,
    )
    per_unit.flags.writeable = False
    total = math.fsum(per_unit) / m.n
    return RiskBreakdown(m.unit_ids, per_unit, total, cfg)


def _above_by_mass(counts_at_or_below: np.ndarray, S: int, p: float) -> np.ndarray:
    # P[θ>C] > p  <=>  S - k > p*S, compared exactly in rationals
    limit = math.floor(Fraction(p) * S)
    return (S - np.asarray(counts_at_or_below)) > limit


def optimal_estimate(m: DrawMatrix, cfg: DecisionConfig) -> ClassificationEstimate:
    """Per-unit posterior (1-p)-quantiles, the minimiser of expected TCL_p.

    At ``p = 0.5`` these are the type-1 posterior medians.
    """
    est = matrix_upper_tail_quantiles(m, cfg.weight)
    return ClassificationEstimate.from_estimates(m.unit_ids, est, cfg.threshold)


def probability_rule(m: DrawMatrix, C: float, p: float) -> ClassificationEstimate:
    """Label above iff P[θ_i > C | y] > p; estimates are the (1-p)-quantiles.

    Only at ``p = 1`` can the quantile (the minimum draw) lie above ``C`` for
    a unit the rule puts below; both choices then carry zero risk and the
    estimate is reported as ``C`` to stay on the labelled side.
    """
    cfg = DecisionConfig(C, p)
    prof = exceedance_profile(m, cfg.threshold)
    labels = _above_by_mass(prof.counts_at_or_below, m.S, cfg.weight)
    est = matrix_upper_tail_quantiles(m, cfg.weight)
    est = np.where(~labels & (est > cfg.threshold), cfg.threshold, est)
    return ClassificationEstimate(m.unit_ids, labels, cfg.threshold, est)


def classify_by_probability(m: DrawMatrix, cfg: DecisionConfig) -> ClassificationEstimate:
    """Label a unit above iff its posterior exceedance probability is > p."""
    return probability_rule(m, cfg.threshold, cfg.weight)


def oracle_best_labels(m: DrawMatrix, cfg: DecisionConfig) -> tuple[np.ndarray, float]:
    """Unit-wise minimum of the two possible risks; ties go below.

    Independent of any quantile computation, so it certifies
    :func:`optimal_estimate`.
    """
    prof = exceedance_profile(m, cfg.threshold)
    p = cfg.weight
    risk_above = p * prof.prob_at_or_below
    risk_below = (1.0 - p) * prof.prob_above
    labels = risk_above < risk_below
    best = np.minimum(risk_above, risk_below)
    return labels, math.fsum(best) / m.n


def joint_enumeration_minimum(m: DrawMatrix, cfg: DecisionConfig) -> tuple[np.ndarray, float]:
    """Minimum expected TCL_p over all 2**n joint labelings.

    Ignores the unit-wise decomposition on purpose; exponential in ``n``.
    """
    if m.n > MAX_ENUMERATION_UNITS:
        raise EnsembleError(
            f"joint enumeration limited to {MAX_ENUMERATION_UNITS} units, got {m.n}"
        )
    prof = exceedance_profile(m, cfg.threshold)
    p = cfg.weight
    codes = np.arange(2 ** m.n, dtype=np.int64)
    # row j is the labeling whose bit i says "unit i above"
    all_labels = ((codes[:, None] >> np.arange(m.n)) & 1).astype(bool)
    risks = np.where(
        all_labels, p * prof.prob_at_or_below, (1.0 - p) * prof.prob_above
    ).sum(axis=1) / m.n
    j = int(np.argmin(risks))
    return all_labels[j], float(risks[j])
