"""Command line interface: ``ensemble-tcl {classify,risk,diagnostics,simulate}``.

Exit codes: 0 success, 2 bad input, 1 internal error. Nothing is written
unless the command succeeds.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .ensemble import DecisionConfig, EnsembleError
from .io import atomic_write, atomic_write_many, draws_to_text, read_draws, read_estimates
from .report import classify_report, diagnostics_document, render, risk_report
from .synthetic import MODEL_KINDS, ModelSpec, SyntheticDataset, simulate

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2

SIDECAR_LEVELS = (0.1, 0.25, 0.5, 0.75, 0.9)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits 2 already; keep the message short
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or comma-separated numbers, got {text!r}")


def _scalar_or_list(values: Optional[list[float]]):
    if values is None:
        return None
    return values[0] if len(values) == 1 else values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ensemble-tcl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def decision_args(p, weight_default=0.5):
        p.add_argument("--threshold", "-C", type=float, required=True, help="cut-off C")
        p.add_argument("--weight", "-p", type=float, default=weight_default,
                       help="false-positive weight p in [0, 1] (default %(default)s)")

    def draw_args(p):
        p.add_argument("draws", type=Path, help="draw file (CSV or NDJSON)")
        p.add_argument("--input-format", choices=("csv", "ndjson"),
                       help="draw file format (default: from the extension)")

    def output_args(p, formats=("json", "csv", "table")):
        p.add_argument("--out", "-o", type=Path, help="output path (default: stdout)")
        p.add_argument("--format", "-f", choices=formats, default="json")

    p = sub.add_parser("classify", help="optimal (1-p)-quantile classification")
    draw_args(p)
    decision_args(p)
    p.add_argument("--unweighted", action="store_true",
                   help="classify under the unweighted loss (posterior medians)")
    p.add_argument("--seed", type=int, help="seed to echo in the report, if the draws are synthetic")
    output_args(p)

    p = sub.add_parser("risk", help="posterior expected TCL_p of supplied estimates")
    draw_args(p)
    p.add_argument("estimates", type=Path, help="CSV with unit_id,estimate or unit_id,label")
    decision_args(p)
    output_args(p)

    p = sub.add_parser("diagnostics", help="posterior TPR/TNR, decomposition and rule comparison")
    draw_args(p)
    p.add_argument("estimates", type=Path, help="CSV with unit_id,estimate or unit_id,label")
    decision_args(p)
    output_args(p, formats=("json", "table"))

    p = sub.add_parser("simulate", help="draws from a conjugate hierarchical model")
    p.add_argument("--model", choices=MODEL_KINDS, required=True)
    p.add_argument("--n", type=int, required=True, help="number of units")
    p.add_argument("--draws", "-S", type=int, required=True, help="posterior draws per unit")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--mu0", type=float, help="normal-normal prior mean (default 0)")
    p.add_argument("--tau2", type=float, help="normal-normal prior variance (default 1)")
    p.add_argument("--sigma2", type=_float_list, help="observation variance(s) (default 1)")
    p.add_argument("--shape", type=float, help="poisson-gamma prior shape (default 2)")
    p.add_argument("--rate", type=float, help="poisson-gamma prior rate (default 1)")
    p.add_argument("--exposure", type=_float_list, help="exposure(s) (default 1)")
    p.add_argument("--out", "-o", type=Path, required=True, help="output directory")
    p.add_argument("--format", "-f", choices=("csv", "ndjson"), default="csv",
                   help="draw file format")
    return parser


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write(out, text)


def _cmd_classify(args) -> int:
    m, digest = read_draws(args.draws, args.input_format)
    cfg = DecisionConfig(args.threshold, args.weight)
    doc = classify_report(m, cfg, digest, seed=args.seed, unweighted=args.unweighted)
    _emit(render(doc, args.format), args.out)
    return EXIT_OK


def _cmd_risk(args) -> int:
    m, digest = read_draws(args.draws, args.input_format)
    cfg = DecisionConfig(args.threshold, args.weight)
    est = read_estimates(args.estimates, m.unit_ids, cfg.threshold)
    _emit(render(risk_report(m, est, cfg, digest), args.format), args.out)
    return EXIT_OK


def _cmd_diagnostics(args) -> int:
    m, digest = read_draws(args.draws, args.input_format)
    cfg = DecisionConfig(args.threshold, args.weight)
    est = read_estimates(args.estimates, m.unit_ids, cfg.threshold)
    _emit(render(diagnostics_document(m, est, cfg, digest), args.format), args.out)
    return EXIT_OK


def truth_to_text(d: SyntheticDataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["unit_id", "truth", "observation"])
    for uid, t, y in zip(d.unit_ids, d.truth, d.observations):
        writer.writerow([uid, repr(float(t)), repr(float(y))])
    return buf.getvalue()


def sidecar_document(d: SyntheticDataset, S: int) -> dict:
    """Exact posterior parameters and quantiles of every simulated unit."""
    spec = d.spec
    hyper = {k: (v.tolist() if hasattr(v, "tolist") else v) for k, v in spec.hyper.items()}
    names = ("mean", "variance") if spec.kind == "normal-normal" else ("shape", "rate")
    quantiles = {q: d.analytic_quantile(q) for q in SIDECAR_LEVELS}
    units = []
    for i, uid in enumerate(d.unit_ids):
        units.append({
            "unit_id": uid,
            "posterior": {names[0]: float(d.post_a[i]), names[1]: float(d.post_b[i])},
            "quantiles": {repr(q): float(quantiles[q][i]) for q in SIDECAR_LEVELS},
        })
    return {
        "tool": {"name": "ensemble-tcl", "version": __version__},
        "model": spec.kind,
        "n": spec.n,
        "draws": S,
        "seed": spec.seed,
        "hyper": hyper,
        "rng": "numpy PCG64, SeedSequence(seed, spawn_key=(unit_index,))",
        "units": units,
    }


def _cmd_simulate(args) -> int:
    if args.model == "normal-normal":
        raw = {"mu0": args.mu0, "tau2": args.tau2, "sigma2": _scalar_or_list(args.sigma2)}
        stray = [f for f in ("shape", "rate", "exposure") if getattr(args, f) is not None]
    else:
        raw = {"shape": args.shape, "rate": args.rate, "exposure": _scalar_or_list(args.exposure)}
        stray = [f for f in ("mu0", "tau2", "sigma2") if getattr(args, f) is not None]
    if stray:
        raise EnsembleError(f"--{', --'.join(stray)} do not apply to {args.model}")
    hyper = {k: v for k, v in raw.items() if v is not None}
    spec = ModelSpec(args.model, args.n, hyper, args.seed)
    d = simulate(spec, args.draws)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    ext = "csv" if args.format == "csv" else "ndjson"
    atomic_write_many({
        out / f"draws.{ext}": draws_to_text(d.posterior, args.format),
        out / "truth.csv": truth_to_text(d),
        out / "analytic.json": json.dumps(sidecar_document(d, args.draws), indent=2, sort_keys=True) + "\n",
    })
    return EXIT_OK


COMMANDS = {
    "classify": _cmd_classify,
    "risk": _cmd_risk,
    "diagnostics": _cmd_diagnostics,
    "simulate": _cmd_simulate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except EnsembleError as exc:
        print(f"ensemble-tcl {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"ensemble-tcl {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"ensemble-tcl {args.command}: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
