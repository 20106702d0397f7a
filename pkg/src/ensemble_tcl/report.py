"""Report documents emitted by the command line tool.

Every report is a plain dict that serialises to stable JSON (sorted keys, no
timestamps) so that identical inputs give byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from typing import Optional

from . import __version__
from .diagnostics import diagnostics_report, richardson_rule
from .ensemble import ClassificationEstimate, DecisionConfig, DrawMatrix, exceedance_profile
from .tcl import optimal_estimate, posterior_risk

UNDEFINED = "undefined"
DECOMPOSITION_TOLERANCE = 1e-12

__all__ = [
    "DECOMPOSITION_TOLERANCE",
    "UNDEFINED",
    "classify_report",
    "diagnostics_document",
    "render",
    "risk_report",
]


def _tool() -> dict:
    return {"name": "ensemble-tcl", "version": __version__}


def _rate(value: Optional[float]):
    return UNDEFINED if value is None else value


def _aggregates(m: DrawMatrix, est: ClassificationEstimate, cfg: DecisionConfig, total_risk: float) -> dict:
    diag = diagnostics_report(m, est, cfg)
    gap = diag.decomposition_gap
    return {
        "expected_tcl_weighted": total_risk,
        "expected_tcl_unweighted": diag.expected_tcl,
        "tpr": _rate(diag.tpr),
        "tnr": _rate(diag.tnr),
        "fpr": _rate(diag.fpr),
        "fnr": _rate(diag.fnr),
        "mass_above": diag.mass_above,
        "mass_below": diag.mass_below,
        "decomposition": {
            "lhs": diag.decomposition_lhs,
            "rhs": diag.decomposition_rhs,
            "abs_diff": gap,
            "tolerance": DECOMPOSITION_TOLERANCE,
            "self_audit": "pass" if gap <= DECOMPOSITION_TOLERANCE else "FAIL",
        },
    }


def _unit_rows(m: DrawMatrix, est: ClassificationEstimate, cfg: DecisionConfig, per_unit_risk) -> list[dict]:
    prof = exceedance_profile(m, cfg.threshold)
    labels = est.labels_at(cfg.threshold)
    rows = []
    for i, uid in enumerate(m.unit_ids):
        rows.append(
            {
                "unit_id": uid,
                "prob_above": float(prof.prob_above[i]),
                "estimate": None if est.estimates is None else float(est.estimates[i]),
                "label": "above" if labels[i] else "below",
                "risk": float(per_unit_risk[i]),
            }
        )
    return rows


def _config(m: DrawMatrix, cfg: DecisionConfig, digest: Optional[str], seed: Optional[int]) -> dict:
    return {
        "threshold": cfg.threshold,
        "weight": cfg.weight,
        "input_digest": digest,
        "seed": seed,
        "n_units": m.n,
        "n_draws": m.S,
    }


def classify_report(
    m: DrawMatrix,
    cfg: DecisionConfig,
    digest: Optional[str] = None,
    seed: Optional[int] = None,
    unweighted: bool = False,
) -> dict:
    """Optimal (1-p)-quantile classification with risks and diagnostics.

    ``unweighted`` classifies under the plain TCL, which is the p = 0.5
    problem; the weight in ``cfg`` is then ignored.
    """
    if unweighted:
        cfg = DecisionConfig(cfg.threshold, 0.5)
    est = optimal_estimate(m, cfg)
    risk = posterior_risk(m, est, cfg)
    config = _config(m, cfg, digest, seed)
    config["loss"] = "unweighted" if unweighted else "weighted"
    return {
        "report": "classify",
        "tool": _tool(),
        "config": config,
        "units": _unit_rows(m, est, cfg, risk.per_unit_risk),
        "aggregates": _aggregates(m, est, cfg, risk.total_risk),
    }


def risk_report(
    m: DrawMatrix, est: ClassificationEstimate, cfg: DecisionConfig, digest: Optional[str] = None
) -> dict:
    risk = posterior_risk(m, est, cfg)
    best = posterior_risk(m, optimal_estimate(m, cfg), cfg)
    aggregates = _aggregates(m, est, cfg, risk.total_risk)
    aggregates["optimal_expected_tcl_weighted"] = best.total_risk
    aggregates["excess_risk"] = risk.total_risk - best.total_risk
    return {
        "report": "risk",
        "tool": _tool(),
        "config": _config(m, cfg, digest, None),
        "units": _unit_rows(m, est, cfg, risk.per_unit_risk),
        "aggregates": aggregates,
    }


def diagnostics_document(
    m: DrawMatrix, est: ClassificationEstimate, cfg: DecisionConfig, digest: Optional[str] = None
) -> dict:
    """Rates, decomposition and a comparison against the probability rule
    P[θ_i > C | y] > p."""
    risk = posterior_risk(m, est, cfg)
    rule = richardson_rule(m, cfg.threshold, cfg.weight)
    rule_risk = posterior_risk(m, rule, cfg)
    supplied = est.labels_at(cfg.threshold)
    disagree = [u for u, a, b in zip(m.unit_ids, supplied, rule.labels) if a != b]
    doc = {
        "report": "diagnostics",
        "tool": _tool(),
        "config": _config(m, cfg, digest, None),
        "units": _unit_rows(m, est, cfg, risk.per_unit_risk),
        "aggregates": _aggregates(m, est, cfg, risk.total_risk),
        "richardson": {
            "alpha": cfg.weight,
            "threshold": cfg.threshold,
            "n_agree": m.n - len(disagree),
            "n_disagree": len(disagree),
            "full_agreement": not disagree,
            "disagreeing_units": disagree,
            "rule_expected_tcl_weighted": rule_risk.total_risk,
        },
    }
    return doc


def audit_passed(doc: dict) -> bool:
    return doc["aggregates"]["decomposition"]["self_audit"] == "pass"


def to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def to_csv(doc: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = ["unit_id", "prob_above", "estimate", "label", "risk"]
    writer.writerow(cols)
    for row in doc["units"]:
        writer.writerow(["" if row[c] is None else (repr(row[c]) if isinstance(row[c], float) else row[c]) for c in cols])
    return buf.getvalue()


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def to_table(doc: dict, color: Optional[bool] = None) -> str:
    """Human-readable summary; ANSI colour unless TCL_NO_COLOR is set."""
    if color is None:
        color = not os.environ.get("TCL_NO_COLOR")

    def paint(text: str, code: str) -> str:
        return f"\x1b[{code}m{text}\x1b[0m" if color else text

    cfg = doc["config"]
    lines = [
        paint(f"{doc['report']}  C={_fmt(cfg['threshold'])}  p={_fmt(cfg['weight'])}  "
              f"n={cfg['n_units']}  S={cfg['n_draws']}", "1"),
        f"{'unit':<12} {'P[>C]':>10} {'estimate':>12} {'label':>6} {'risk':>10}",
    ]
    for row in doc["units"]:
        label = paint(f"{row['label']:>6}", "31" if row["label"] == "above" else "34")
        est = "-" if row["estimate"] is None else _fmt(row["estimate"])
        lines.append(f"{row['unit_id']:<12} {_fmt(row['prob_above']):>10} {est:>12} {label} {_fmt(row['risk']):>10}")
    agg = doc["aggregates"]
    for key in ("expected_tcl_weighted", "expected_tcl_unweighted", "tpr", "tnr", "fpr", "fnr"):
        lines.append(f"{key:<24} {_fmt(agg[key])}")
    dec = agg["decomposition"]
    status = paint(dec["self_audit"], "32" if dec["self_audit"] == "pass" else "31;1")
    lines.append(f"{'decomposition':<24} lhs={_fmt(dec['lhs'])} rhs={_fmt(dec['rhs'])} [{status}]")
    if "richardson" in doc:
        r = doc["richardson"]
        lines.append(f"{'richardson agreement':<24} {r['n_agree']}/{r['n_agree'] + r['n_disagree']}")
    return "\n".join(lines) + "\n"


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return to_json(doc)
    if fmt == "csv":
        return to_csv(doc)
    if fmt == "table":
        return to_table(doc)
    raise ValueError(f"unknown report format {fmt!r}")


def recompute_total(doc: dict) -> float:
    """Mean of the per-unit risk column, for checking aggregates."""
    return math.fsum(row["risk"] for row in doc["units"]) / len(doc["units"])
