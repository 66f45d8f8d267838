"""Command-line interface: ``spikeconv <command> ...``.

Machine-readable results go to stdout as a single JSON document. Logs and
the pipeline Gantt chart go to stderr. Exit codes: 0 success, 1 runtime
error or failed comparison, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ann import ann_forward
from .converter import convert
from .energy import energy_report, tally_inference
from .engine import SpikeTrain, run_snn, weighted_rate
from .error_analysis import anchor_lattice_demo, compare_models, find_irregular_patterns, pattern_outcomes
from .exceptions import SpikeConvError
from .fixtures import DEFAULT_SEED, TOY_RATES, TOY_WEIGHTS, toy_model, random_suite
from .model_io import dumps_canonical, load_model, load_snn, load_tensor, save_snn
from .neurons import IF, normalize_kind, rate_normalizer
from .pipeline import build_schedule, gantt, summarize, validate_schedule

log = logging.getLogger("spikeconv")


def _emit(doc) -> None:
    sys.stdout.write(dumps_canonical(doc) + "\n")


def _tolist(arrays):
    return [np.asarray(a).tolist() for a in arrays]


def _kind(value: str) -> str:
    try:
        return normalize_kind(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def cmd_convert(args) -> int:
    ann = load_model(args.model)
    t_delay = args.T if args.t_delay is None else args.t_delay
    L_values = {layer.quant.L for layer in ann.layers if layer.quant is not None}
    lossless_L = args.T if args.neuron == IF else 2**args.T - 1
    if L_values and L_values != {lossless_L}:
        log.warning("ANN quantization L=%s does not match the lossless level %d for %s at T=%d",
                    sorted(L_values), lossless_L, args.neuron, args.T)
    snn = convert(ann, args.T, args.neuron, t_delay)
    save_snn(snn, args.out)
    _emit({"out": str(args.out), "neuron": snn.kind, "T": snn.T, "T_delay": snn.T_delay,
           "layers": len(snn.layers), "output_scale": snn.output_scale})
    return 0


def _ann_input(x, kind: str):
    return weighted_rate(x, kind) if isinstance(x, SpikeTrain) else x


def cmd_run_ann(args) -> int:
    model = load_model(args.model)
    result = ann_forward(model, _ann_input(load_tensor(args.input), args.neuron))
    _emit({"activations": _tolist(result.activations), "output": result.output.tolist()})
    return 0


def cmd_run_snn(args) -> int:
    snn = load_snn(args.snn)
    trace = run_snn(snn, load_tensor(args.input))
    _emit({
        "neuron": snn.kind,
        "T": snn.T,
        "T_delay": snn.T_delay,
        "rates": _tolist(trace.rates),
        "residuals": _tolist(trace.residuals),
        "output_potentials": _tolist(trace.output_potentials),
        "output": trace.output.tolist(),
    })
    return 0


def cmd_compare(args) -> int:
    ann = load_model(args.model)
    t_delay = args.T if args.t_delay is None else args.t_delay
    snn = convert(ann, args.T, args.neuron, t_delay)
    result = compare_models(ann, snn, load_tensor(args.input))
    report = result.report.to_dict()
    ok = result.report.max_abs_err <= args.tol
    _emit({"neuron": snn.kind, "T": snn.T, "T_delay": snn.T_delay, "tolerance": args.tol, "passed": ok,
           **report, "ann_output": result.ann_output.tolist(), "snn_output": result.snn_output.tolist()})
    return 0 if ok else 1


def cmd_pipeline(args) -> int:
    t_delay = args.T if args.t_delay is None else args.t_delay
    schedule = build_schedule(args.layers, args.T, t_delay, args.samples)
    chart = gantt(schedule)
    print("\n".join(chart), file=sys.stderr)
    doc = summarize(schedule)
    doc["conflicts"] = len(validate_schedule(schedule))
    doc["gantt"] = chart
    _emit(doc)
    return 0


def cmd_energy(args) -> int:
    x = load_tensor(args.input)
    snn = load_snn(args.snn)
    ledger = tally_inference(run_snn(snn, x), snn, paper_mode=args.paper_mode)
    arch = args.architecture or snn.metadata.get("architecture") or Path(args.snn).stem
    reference = ref_name = None
    if args.reference:
        ref = load_snn(args.reference)
        reference = tally_inference(run_snn(ref, x), ref, paper_mode=args.paper_mode)
        ref_name = Path(args.reference).stem
    _emit(energy_report(ledger, arch, reference, ref_name))
    return 0


def _demo_order(args) -> dict:
    T = args.T or 5
    found = find_irregular_patterns(TOY_RATES, TOY_WEIGHTS, 1.0, T)
    _, outs, residuals = pattern_outcomes(TOY_RATES, TOY_WEIGHTS, 1.0, T, T_delay=T)
    outcomes = sorted({(round(float(o.mean()), 12), round(float(r), 12)) for o, r in zip(outs, residuals)})

    def w(witness):
        return None if witness is None else witness.to_dict()

    return {
        "demo": "fig1",
        "rates": list(TOY_RATES),
        "weights": list(TOY_WEIGHTS),
        "theta": 1.0,
        "T": T,
        "ann_activation": found.target_rate,
        "patterns": found.n_patterns,
        "plain_if": {
            "zero_residual": w(found.uniform),
            "overflow": w(found.overflow),
            "negative": w(found.negative),
            "counts": {"zero_residual": found.n_uniform, "overflow": found.n_overflow, "negative": found.n_negative},
        },
        "delay_spike": {"T_delay": T, "outcomes": [{"rate": r, "residual": v} for r, v in outcomes]},
    }


def _demo_anchor(args) -> dict:
    T = args.T or 4
    lattice = anchor_lattice_demo(T, args.anchor_w, args.anchor_h, args.neuron)
    return {"demo": "anchor", "T": T, "neuron": lattice.kind, "anchor": [args.anchor_w, args.anchor_h],
            "attainable": lattice.cardinality, "sizes": [list(s) for s in lattice.sizes]}


def _demo_suite(args) -> dict:
    kind = args.neuron
    T_values = [args.T] if args.T else (range(2, 9) if kind == IF else range(2, 7))
    worst = worst_out = 0.0
    violations = 0
    for T, ann, x in random_suite(args.seed, args.count, lambda t: rate_normalizer(kind, t), T_values):
        result = compare_models(ann, convert(ann, T, kind, T), x)
        worst = max(worst, max((float(np.max(np.abs(e))) for e in result.report.err if e.size), default=0.0))
        worst_out = max(worst_out, float(np.max(np.abs(result.report.output_err))))
        violations += result.report.residual_violations
    return {"demo": "suite", "seed": args.seed, "count": args.count, "neuron": kind,
            "max_layer_err": worst, "max_output_err": worst_out, "residual_violations": violations}


def cmd_demo(args) -> int:
    handlers = {"fig1": _demo_order, "anchor": _demo_anchor, "suite": _demo_suite}
    _emit(handlers[args.which](args))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spikeconv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser.add_argument("--log-timestamps", action="store_true", help="prefix log lines with timestamps")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="fuse an ANN model into an SNN model file")
    p.add_argument("--model", required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--neuron", type=_kind, default=IF)
    p.add_argument("--t-delay", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("run-ann", help="run the reference ANN")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--neuron", type=_kind, default=IF, help="rate decoding for spike-train inputs")
    p.set_defaults(func=cmd_run_ann)

    p = sub.add_parser("run-snn", help="run a converted SNN")
    p.add_argument("--snn", required=True)
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_run_snn)

    p = sub.add_parser("compare", help="convert, run both paths and report the conversion error")
    p.add_argument("--model", required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--neuron", type=_kind, default=IF)
    p.add_argument("--t-delay", type=int)
    p.add_argument("--input", required=True)
    p.add_argument("--tol", type=float, default=1e-5)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("pipeline", help="simulate the delay-spike pipeline schedule")
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--t-delay", type=int)
    p.add_argument("--samples", type=int, default=1)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("energy", help="instruction-level energy report for one inference")
    p.add_argument("--snn", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--paper-mode", action="store_true", help="price silent fire steps like spiking ones")
    p.add_argument("--reference", help="SNN file of the reference run for the energy ratio")
    p.add_argument("--architecture")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("demo", help="conversion-error demonstrations")
    p.add_argument("which", choices=("fig1", "anchor", "suite"))
    p.add_argument("--T", type=int)
    p.add_argument("--neuron", type=_kind, default=IF)
    p.add_argument("--anchor-w", type=float, default=1.0)
    p.add_argument("--anchor-h", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--count", type=int, default=100)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = "%(asctime)s %(levelname)s %(message)s" if args.log_timestamps else "%(levelname)s %(message)s"
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format=fmt, stream=sys.stderr)
    try:
        return args.func(args)
    except (SpikeConvError, ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
