"""Multi-step, layer-by-layer spiking inference over an :class:`SnnModel`."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .converter import SnnModel
from .exceptions import PayloadError, ShapeError
from .neurons import IF, delay_spike_run, normalize_kind, rate_normalizer, time_coefficients
from .tensor import as_tensor


@dataclass
class SpikeTrain:
    """Binary tensor of shape ``[T, *neurons]``."""

    values: np.ndarray

    def __post_init__(self):
        self.values = as_tensor(self.values, "spike train")
        if self.values.ndim < 1:
            raise ShapeError("a spike train needs a leading time axis", dim="T")
        if not is_binary(self.values):
            raise PayloadError("spike train contains values other than 0 and 1")

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def neuron_shape(self) -> tuple[int, ...]:
        return self.values.shape[1:]


@dataclass
class InferenceTrace:
    """Everything recorded by :func:`run_snn` for one input.

    ``trains``, ``residuals`` and ``drives`` have one entry per hidden SNN
    layer. ``drives`` is the total time-weighted input each neuron received
    (``sum_t c[t] * I[t]``), the quantity the residual bound is stated for.
    """

    kind: str
    T: int
    trains: list[SpikeTrain]
    residuals: list[np.ndarray]
    drives: list[np.ndarray]
    output_potentials: list[np.ndarray]
    output: np.ndarray
    input_train: SpikeTrain | None = None
    input_currents: list[np.ndarray] = field(default_factory=list)

    @property
    def rates(self) -> list[np.ndarray]:
        return [weighted_rate(train, self.kind) for train in self.trains]


def is_binary(x: np.ndarray) -> bool:
    return bool(np.all((x == 0) | (x == 1)))


def encode_input(x, T: int, kind: str = IF) -> list[np.ndarray]:
    """Constant-current coding: the analog input repeated for ``T`` steps.

    Time scaling for tdIF is applied by the receiving neurons, so ``kind``
    does not change the currents.
    """
    normalize_kind(kind)
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    x = as_tensor(x, "input")
    return [x.copy() for _ in range(T)]


def _time_average(values: np.ndarray, kind: str) -> np.ndarray:
    T = values.shape[0]
    return np.tensordot(time_coefficients(kind, T), values, axes=1) / rate_normalizer(kind, T)


def weighted_rate(train: SpikeTrain | np.ndarray, kind: str) -> np.ndarray:
    """``sum_t S[t] / T`` for IF; ``sum_t 2**(T-t) S[t] / (2**T - 1)`` for tdIF."""
    if not isinstance(train, SpikeTrain):
        train = SpikeTrain(train)
    return _time_average(train.values, kind)


def _decode(potentials, kind: str, output_scale: float) -> np.ndarray:
    stack = np.stack([as_tensor(v, "potential") for v in potentials])
    return _time_average(stack, kind) * output_scale


def decode_if(potentials, output_scale: float = 1.0) -> np.ndarray:
    """Mean output membrane potential over ``T`` steps, rescaled."""
    return _decode(potentials, "IF", output_scale)


def decode_tdif(potentials, output_scale: float = 1.0) -> np.ndarray:
    """``sum_t 2**(T-t) V[t] / (2**T - 1)``, rescaled."""
    return _decode(potentials, "tdIF", output_scale)


def _prepare_input(model: SnnModel, x):
    if isinstance(x, SpikeTrain):
        if x.T != model.T:
            raise ShapeError(f"input spike train has T={x.T}, model expects T={model.T}", dim="T")
        return list(x.values), x
    x = as_tensor(x, "input")
    if model.input_shape is not None and x.shape != tuple(model.input_shape):
        if x.size != int(np.prod(model.input_shape)):
            raise ShapeError(f"input shape {x.shape} does not match model input {tuple(model.input_shape)}", dim="input")
        x = x.reshape(model.input_shape)
    return encode_input(x, model.T, model.kind), None


def run_snn(model: SnnModel, x) -> InferenceTrace:
    """Run the spiking network on one input.

    ``x`` is either an analog tensor (constant-current coded into the first
    layer) or a :class:`SpikeTrain` of input spikes with ``T`` matching the
    model. Every hidden layer runs the delay-spike schedule; the output
    layer records ``V[t] = W_hat @ S[t] + B_hat`` without thresholding.
    """
    kind = model.kind
    incoming, input_train = _prepare_input(model, x)
    coeff = time_coefficients(kind, model.T)
    trains, residuals, drives = [], [], []
    first_currents: list[np.ndarray] = []
    for index, layer in enumerate(model.layers):
        currents = [layer.current(s) for s in incoming]
        if index == 0:
            first_currents = currents
        if layer.is_output:
            output_potentials = currents
            break
        spikes, residual = delay_spike_run(kind, layer.theta, model.T, model.T_delay, currents)
        if not is_binary(spikes):
            raise PayloadError(f"layer {index} produced a non-binary payload")
        trains.append(SpikeTrain(spikes))
        residuals.append(residual)
        drives.append(np.tensordot(coeff, np.stack(currents), axes=1))
        incoming = list(spikes)
    decode = decode_if if kind == IF else decode_tdif
    return InferenceTrace(
        kind=kind,
        T=model.T,
        trains=trains,
        residuals=residuals,
        drives=drives,
        output_potentials=output_potentials,
        output=decode(output_potentials, model.output_scale),
        input_train=input_train,
        input_currents=first_currents,
    )
