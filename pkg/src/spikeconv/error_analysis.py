"""Conversion-error measurement and the two error-family demonstrations.

* Residual-potential error: the spike count of a plain IF neuron depends on
  the order of its input spikes, not only on their rates.
  :func:`find_irregular_patterns` searches every spike placement for
  witnesses of this.
* Quantization error: a regression output computed from a rate on a
  ``{0..N}/N`` lattice can only reach ``N + 1`` values
  (:func:`anchor_lattice_demo`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .ann import AnnModel, ann_forward, quant_clip
from .converter import SnnModel
from .engine import InferenceTrace, SpikeTrain, run_snn, weighted_rate
from .exceptions import ShapeError
from .neurons import IF, delay_spike_run, normalize_kind, rate_normalizer
from .tensor import as_tensor

RESIDUAL_TOL = 1e-9


@dataclass
class ErrorReport:
    """Per-layer ``Err = r - a`` (rate units) and ``eps = residual / (theta * T')``."""

    err: list[np.ndarray]
    epsilon: list[np.ndarray]
    residual_violations: int = 0
    output_err: np.ndarray | None = None
    layer_names: list[str] = field(default_factory=list)

    @property
    def max_abs_err(self) -> float:
        values = [np.max(np.abs(e)) for e in self.err if e.size]
        if self.output_err is not None and self.output_err.size:
            values.append(np.max(np.abs(self.output_err)))
        return float(max(values, default=0.0))

    @property
    def mean_abs_err(self) -> float:
        flat = [np.abs(e).ravel() for e in self.err]
        return float(np.concatenate(flat).mean()) if flat else 0.0

    def to_dict(self) -> dict:
        layers = []
        for i, (e, eps) in enumerate(zip(self.err, self.epsilon)):
            layers.append(
                {
                    "layer": self.layer_names[i] if i < len(self.layer_names) else str(i),
                    "max_abs_err": float(np.max(np.abs(e))) if e.size else 0.0,
                    "mean_abs_err": float(np.mean(np.abs(e))) if e.size else 0.0,
                    "err": e.tolist(),
                    "epsilon": eps.tolist(),
                }
            )
        out = {
            "layers": layers,
            "max_abs_err": self.max_abs_err,
            "mean_abs_err": self.mean_abs_err,
            "residual_violations": self.residual_violations,
        }
        if self.output_err is not None:
            out["output_err"] = self.output_err.tolist()
            out["output_max_abs_err"] = float(np.max(np.abs(self.output_err))) if self.output_err.size else 0.0
        return out


def residual_epsilon(V_T, V_0, theta: float, T: int) -> np.ndarray:
    """``(V_T - V_0) / (theta * T)``."""
    if T < 1 or theta <= 0:
        raise ValueError(f"need T >= 1 and theta > 0, got T={T}, theta={theta}")
    return (as_tensor(V_T, "V_T") - as_tensor(V_0, "V_0")) / (theta * T)


def count_residual_violations(residuals, drives, theta: float = 1.0) -> int:
    """Neurons with non-negative drive whose residual leaves ``[0, theta)``."""
    total = 0
    for res, drive in zip(residuals, drives):
        res, drive = np.asarray(res), np.asarray(drive)
        active = drive >= 0
        bad = (res < -RESIDUAL_TOL * theta) | (res >= theta)
        total += int(np.count_nonzero(active & bad))
    return total


def conversion_error(ann_acts, snn_rates, residuals=None, drives=None, theta: float = 1.0, T: int = 1,
                     layer_names=None) -> ErrorReport:
    """Elementwise ``r - a`` per layer.

    ``ann_acts`` must already be in rate units (ANN activation divided by the
    layer's lambda). ``residuals`` and ``drives``, when given, fill in
    ``epsilon`` and ``residual_violations``; ``T`` is the rate normalizer
    (``T`` for IF, ``2**T - 1`` for tdIF).
    """
    if len(ann_acts) != len(snn_rates):
        raise ShapeError(f"{len(ann_acts)} ANN layers vs {len(snn_rates)} SNN layers", dim="layers")
    err = []
    for i, (a, r) in enumerate(zip(ann_acts, snn_rates)):
        a, r = np.asarray(a, dtype=np.float64), np.asarray(r, dtype=np.float64)
        if a.shape != r.shape:
            raise ShapeError(f"layer {i}: ANN shape {a.shape} vs SNN shape {r.shape}", dim=f"layer {i}")
        err.append(r - a)
    if residuals is None:
        epsilon = [np.zeros_like(e) for e in err]
        violations = 0
    else:
        epsilon = [residual_epsilon(res, np.zeros_like(res), theta, T) for res in residuals]
        violations = count_residual_violations(residuals, drives, theta) if drives is not None else 0
    return ErrorReport(err, epsilon, violations, layer_names=list(layer_names or []))


@dataclass
class Comparison:
    report: ErrorReport
    ann_output: np.ndarray
    snn_output: np.ndarray
    trace: InferenceTrace


def compare_models(ann: AnnModel, snn: SnnModel, x) -> Comparison:
    """Run the ANN and the converted SNN on the same input and diff them.

    A :class:`SpikeTrain` input is fed to the SNN as-is and to the ANN as its
    weighted rate.
    """
    trace = run_snn(snn, x)
    ann_input = weighted_rate(x, snn.kind) if isinstance(x, SpikeTrain) else x
    ref = ann_forward(ann, ann_input)
    ann_acts = [ref.activations[layer.source_index] / layer.scale for layer in snn.hidden_layers]
    names = [f"{layer.op}@{layer.source_index}" for layer in snn.hidden_layers]
    theta = snn.hidden_layers[0].theta if snn.hidden_layers else 1.0
    report = conversion_error(
        ann_acts, trace.rates, trace.residuals, trace.drives, theta, rate_normalizer(snn.kind, snn.T), names
    )
    report.output_err = trace.output - ref.output
    return Comparison(report, ref.output, trace.output, trace)


@dataclass
class Witness:
    """One input spike placement with the resulting output."""

    inputs: SpikeTrain
    output: SpikeTrain
    residual: float

    @property
    def rate(self) -> float:
        return float(self.output.values.mean())

    def to_dict(self) -> dict:
        return {
            "inputs": self.inputs.values.astype(int).T.tolist(),
            "output": self.output.values.astype(int).tolist(),
            "rate": self.rate,
            "residual": self.residual,
        }


@dataclass
class IrregularPatterns:
    target_rate: float
    n_patterns: int
    uniform: Witness | None
    overflow: Witness | None
    negative: Witness | None
    n_uniform: int = 0
    n_overflow: int = 0
    n_negative: int = 0


def _placements(count: int, T: int) -> np.ndarray:
    combos = list(itertools.combinations(range(T), count))
    out = np.zeros((len(combos), T), dtype=bool)
    for row, combo in enumerate(combos):
        out[row, list(combo)] = True
    return out


def enumerate_patterns(rates, T: int):
    """Yield blocks ``[P, n_inputs, T]`` of every spike placement in lexicographic order.

    Input ``i`` fires exactly ``rates[i] * T`` times.
    """
    rates = np.asarray(rates, dtype=np.float64)
    counts = rates * T
    if np.any(np.abs(counts - np.rint(counts)) > 1e-9) or np.any(counts < 0) or np.any(counts > T):
        raise ValueError(f"rates * T must be integers in [0, T], got {counts.tolist()}")
    per_input = [_placements(int(round(k)), T) for k in counts]
    if len(per_input) == 1:
        yield per_input[0][:, None, :]
        return
    rest = [np.stack(combo) for combo in itertools.product(*per_input[1:])]
    rest = np.stack(rest)
    for first in per_input[0]:
        block = np.empty((len(rest), len(per_input), T), dtype=bool)
        block[:, 0, :] = first
        block[:, 1:, :] = rest
        yield block


def pattern_outcomes(rates, weights, theta: float, T: int, T_delay: int = 0, kind: str = IF):
    """Simulate one neuron on every placement; returns ``(patterns, outputs, residuals)``."""
    weights = as_tensor(weights, "weights").reshape(-1)
    pats, outs, residuals = [], [], []
    for block in enumerate_patterns(rates, T):
        currents = np.einsum("pit,i->tp", block.astype(np.float64), weights)
        spikes, residual = delay_spike_run(kind, theta, T, T_delay, list(currents))
        pats.append(block)
        outs.append(spikes.T)
        residuals.append(residual)
    return np.concatenate(pats), np.concatenate(outs), np.concatenate(residuals)


def find_irregular_patterns(rates, weights, theta: float, T: int) -> IrregularPatterns:
    """Exhaustively search plain-IF spike placements for the three residual cases.

    Returns the lexicographically first witness of (a) zero residual with the
    lossless rate, (b) residual ``>= theta`` and (c) negative residual; a case
    with no witness is ``None``.
    """
    rates = np.asarray(rates, dtype=np.float64)
    weights = as_tensor(weights, "weights").reshape(-1)
    if rates.shape != weights.shape:
        raise ShapeError(f"{rates.size} rates vs {weights.size} weights", dim="inputs")
    x = float(weights @ rates)
    target = quant_clip(x, theta, T) / theta
    pats, outs, residuals = pattern_outcomes(rates, weights, theta, T, T_delay=0)
    out_rates = outs.mean(axis=1)
    tol = RESIDUAL_TOL * theta
    uniform = (np.abs(residuals) <= tol) & (np.abs(out_rates - target) <= 1e-12)
    overflow = residuals >= theta - tol
    negative = residuals < -tol

    def first(mask):
        idx = np.flatnonzero(mask)
        if not idx.size:
            return None
        i = idx[0]
        return Witness(SpikeTrain(pats[i].T.astype(np.float64)), SpikeTrain(outs[i].astype(np.float64)),
                       float(residuals[i]))

    return IrregularPatterns(
        target_rate=target,
        n_patterns=len(pats),
        uniform=first(uniform),
        overflow=first(overflow),
        negative=first(negative),
        n_uniform=int(uniform.sum()),
        n_overflow=int(overflow.sum()),
        n_negative=int(negative.sum()),
    )


@dataclass
class AnchorLattice:
    T: int
    kind: str
    sizes: list[tuple[float, float]]

    @property
    def cardinality(self) -> int:
        return len(self.sizes)


def anchor_lattice_demo(T: int, anchor_w: float = 1.0, anchor_h: float = 1.0, kind: str = IF) -> AnchorLattice:
    """Box sizes reachable by ``(w, h) = exp(+-v) * anchor`` for rates ``v`` on the lattice.

    The two regression neurons have weights ``[1, -1]`` on one shared
    quantized input, so ``v`` ranges over ``{0, 1, ..., N} / N`` with
    ``N = T`` for IF and ``N = 2**T - 1`` for tdIF.
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    kind = normalize_kind(kind)
    n = rate_normalizer(kind, T)
    sizes = sorted({(math.exp(k / n) * anchor_w, math.exp(-k / n) * anchor_h) for k in range(n + 1)})
    return AnchorLattice(T, kind, sizes)
