"""Instruction-level energy accounting for IF and tdIF neurons.

Per-neuron phase costs are built from single-instruction prices:

    accumulate (IF)   = MLD + MLD + ADD + MST            = 12.7 pJ
    accumulate (tdIF) = accumulate (IF) + SHL            = 13.9 pJ
    fire, spike       = MLD + GTH + MUL + SUB + MST + EVC + EVC_event = 13.2 pJ
    fire, silent      = the same without EVC_event       = 12.1 pJ

MUL is priced like ADD/SUB. Accumulation is spike-driven (one accumulate per
incoming spike per target synapse); firing is evaluated for every hidden
neuron at every step. Bias accumulations are charged once per neuron per step
when the bias is nonzero, at the IF price for both kinds: the per-step tdIF
bias ``c[t] * B`` is precomputed like the per-step thresholds, so it needs
no shift. Constant analog currents into the first layer are counted the same
way.

All sums are exact rationals, so identities such as
``E(tdIF) - E(IF) == 1.2 pJ * synaptic_events`` hold exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .converter import SnnLayer, SnnModel
from .engine import InferenceTrace
from .neurons import IF, TDIF, normalize_kind
from .tensor import _conv2d_batch


def _exact(value) -> Fraction:
    return Fraction(str(value))


@dataclass(frozen=True)
class InstructionCostTable:
    """Energy per instruction in pJ."""

    add_sub: float = 1.4
    compare: float = 1.2
    shift: float = 1.2
    evc_base: float = 0.5
    evc_event: float = 1.1
    mld: float = 3.7
    mst: float = 3.9
    mul: float | None = None  # defaults to add_sub

    def __post_init__(self):
        for name in ("add_sub", "compare", "shift", "evc_base", "evc_event", "mld", "mst"):
            if not getattr(self, name) > 0:
                raise ValueError(f"instruction cost {name} must be > 0")

    def exact(self, name: str) -> Fraction:
        value = getattr(self, name)
        if name == "mul" and value is None:
            value = self.add_sub
        return _exact(value)


DEFAULT_COSTS = InstructionCostTable()


def phase_cost_exact(kind: str, phase: str, event_generated: bool = False,
                     table: InstructionCostTable = DEFAULT_COSTS) -> Fraction:
    kind = normalize_kind(kind)
    c = table.exact
    if phase == "accumulate":
        cost = c("mld") + c("mld") + c("add_sub") + c("mst")
        return cost + c("shift") if kind == TDIF else cost
    if phase == "fire":
        cost = c("mld") + c("compare") + c("mul") + c("add_sub") + c("mst") + c("evc_base")
        return cost + c("evc_event") if event_generated else cost
    raise ValueError(f"unknown phase {phase!r}; expected 'accumulate' or 'fire'")


def phase_cost(kind: str, phase: str, event_generated: bool = False,
               table: InstructionCostTable = DEFAULT_COSTS) -> float:
    """Energy in pJ of one neuron running one phase for one step."""
    return float(phase_cost_exact(kind, phase, event_generated, table))


@dataclass
class EnergyLedger:
    kind: str
    T: int
    synaptic_events: int
    bias_events: int
    fire_steps_spiking: int
    fire_steps_silent: int
    total: Fraction
    average_spiking_rate: float
    paper_mode: bool = False

    @property
    def total_pj(self) -> float:
        return float(self.total)

    def to_dict(self) -> dict:
        return {
            "neuron": self.kind,
            "T": self.T,
            "synaptic_events": self.synaptic_events,
            "bias_events": self.bias_events,
            "fire_steps_spiking": self.fire_steps_spiking,
            "fire_steps_silent": self.fire_steps_silent,
            "average_spiking_rate": self.average_spiking_rate,
            "total_pj": self.total_pj,
            "paper_mode": self.paper_mode,
        }


def synaptic_fanout(layer: SnnLayer, input_shape: tuple[int, ...]) -> np.ndarray:
    """Number of target neurons reached by each input element (structural, weight-independent)."""
    n = int(np.prod(input_shape))
    probes = np.eye(n).reshape((n,) + tuple(input_shape))
    if layer.pre_pool:
        probes = np.stack([layer.pooled(p) for p in probes])
    if layer.op == "conv2d":
        out = _conv2d_batch(probes, np.ones_like(layer.weights), layer.stride, layer.padding)
    else:
        out = probes.reshape(n, -1) @ np.ones((layer.weights.shape[1], layer.weights.shape[0]))
    return np.count_nonzero(out.reshape(n, -1) > 0, axis=1).reshape(input_shape)


def _bias_neurons(layer: SnnLayer, out_shape: tuple[int, ...]) -> int:
    per_channel = int(np.prod(out_shape[1:])) if len(out_shape) > 1 else 1
    return int(np.count_nonzero(layer.bias)) * per_channel


def average_spiking_rate(trace: InferenceTrace) -> float:
    """Emitted spikes over (hidden neurons x T)."""
    spikes = sum(float(t.values.sum()) for t in trace.trains)
    slots = sum(t.values.size for t in trace.trains)
    return spikes / slots if slots else 0.0


def tally_inference(trace: InferenceTrace, model: SnnModel, paper_mode: bool = False,
                    table: InstructionCostTable = DEFAULT_COSTS, include_output: bool = True) -> EnergyLedger:
    """Count events in ``trace`` and price them.

    ``paper_mode`` prices every fire step at the spiking cost.
    ``include_output=False`` leaves out the readout layer's accumulations.
    """
    kind = normalize_kind(trace.kind)
    if kind != model.kind or trace.T != model.T or len(trace.trains) != len(model.hidden_layers):
        raise ValueError("trace was not produced by this model")
    T = trace.T
    synaptic = bias = 0
    for index, layer in enumerate(model.layers):
        if layer.is_output and not include_output:
            break
        out_shape = trace.output_potentials[0].shape if layer.is_output else trace.trains[index].neuron_shape
        if index == 0 and trace.input_train is None:
            bias += int(sum(np.count_nonzero(c) for c in trace.input_currents))
            continue
        incoming = trace.input_train if index == 0 else trace.trains[index - 1]
        fanout = synaptic_fanout(layer, incoming.neuron_shape)
        synaptic += int(np.tensordot(incoming.values, fanout, axes=incoming.values.ndim - 1).sum())
        bias += _bias_neurons(layer, out_shape) * T

    spiking = int(sum(t.values.sum() for t in trace.trains))
    silent = int(sum(t.values.size for t in trace.trains)) - spiking
    fire_silent_cost = phase_cost_exact(kind, "fire", paper_mode, table)
    total = (
        synaptic * phase_cost_exact(kind, "accumulate", table=table)
        + bias * phase_cost_exact(IF, "accumulate", table=table)
        + spiking * phase_cost_exact(kind, "fire", True, table)
        + silent * fire_silent_cost
    )
    return EnergyLedger(kind, T, synaptic, bias, spiking, silent, total, average_spiking_rate(trace), paper_mode)


def energy_report(ledger: EnergyLedger, architecture: str, reference: EnergyLedger | None = None,
                  reference_name: str | None = None) -> dict:
    """Inference energy summary; the ratio is against ``reference`` (itself when omitted)."""
    ref = reference or ledger
    report = {"architecture": architecture, **ledger.to_dict()}
    report["total_mj"] = ledger.total_pj * 1e-9
    report["reference"] = reference_name or architecture
    report["energy_ratio"] = float(ledger.total / ref.total) if ref.total else None
    return report
