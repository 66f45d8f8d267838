"""Integrate-and-fire dynamics on whole layers of neurons.

Two neuron kinds are supported:

* ``"IF"``: ``M = V + I``; fire where ``M >= theta``; ``V = M - theta * S``.
* ``"tdIF"``: the same with the input and the threshold at step ``t``
  scaled by ``c[t] = 2**(T - t)``, so a train encodes a T-bit binary number.

Both use soft reset and fire at exactly the threshold. The delay-spike
schedule accumulates ``T_delay`` steps of input before the first output
slot is emitted (see :func:`delay_spike_run`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ann import SNAP_TOL
from .exceptions import NeuronStepError, ShapeError
from .tensor import as_tensor

IF = "IF"
TDIF = "tdIF"

_ALIASES = {"if": IF, "tdif": TDIF}


def normalize_kind(kind: str) -> str:
    try:
        return _ALIASES[str(kind).lower()]
    except KeyError:
        raise ValueError(f"unknown neuron kind {kind!r}; expected 'IF' or 'tdIF'") from None


def time_coefficients(kind: str, T: int) -> np.ndarray:
    """Per-step weights ``c[1..T]``: all ones for IF, ``2**(T-t)`` for tdIF."""
    if normalize_kind(kind) == IF:
        return np.ones(T)
    return 2.0 ** np.arange(T - 1, -1, -1)


def rate_normalizer(kind: str, T: int) -> int:
    """``T`` for IF, ``2**T - 1`` for tdIF (the sum of the coefficients)."""
    return T if normalize_kind(kind) == IF else 2**T - 1


def fires(M: np.ndarray, threshold: float) -> np.ndarray:
    """Heaviside ``M - threshold >= 0`` with float round-off at the boundary snapped to firing."""
    slack = SNAP_TOL * np.maximum(threshold, np.abs(M))
    return M - threshold >= -slack


@dataclass
class NeuronLayerState:
    V: np.ndarray
    theta: float
    T: int
    kind: str = IF
    T_delay: int = 0
    M_bar: np.ndarray | None = None
    t_now: int = 0

    def __post_init__(self):
        self.kind = normalize_kind(self.kind)
        self.V = as_tensor(self.V, "V").copy()
        if self.M_bar is None:
            self.M_bar = np.zeros_like(self.V)
        if self.theta <= 0:
            raise ValueError(f"theta must be > 0, got {self.theta}")
        if not 0 <= self.T_delay <= self.T:
            raise ValueError(f"T_delay must lie in [0, {self.T}], got {self.T_delay}")

    @classmethod
    def zeros(cls, shape, theta: float, T: int, kind: str = IF, T_delay: int = 0):
        return cls(np.zeros(shape), theta, T, kind, T_delay)

    def threshold(self, t: int) -> float:
        """Firing threshold at 1-based step ``t``."""
        return float(time_coefficients(self.kind, self.T)[t - 1]) * self.theta


def _step(state: NeuronLayerState, current, scale: float) -> np.ndarray:
    if state.t_now >= state.T:
        raise NeuronStepError(f"neuron layer already ran all T={state.T} steps")
    current = as_tensor(current, "input_current")
    if current.shape != state.V.shape:
        raise ShapeError(f"current shape {current.shape} does not match state {state.V.shape}", dim="neurons")
    threshold = scale * state.theta
    M = state.V + scale * current
    spikes = fires(M, threshold).astype(np.float64)
    state.V = M - threshold * spikes
    state.t_now += 1
    return spikes


def if_step(state: NeuronLayerState, current) -> np.ndarray:
    """Advance one plain IF step; returns the binary spike tensor."""
    return _step(state, current, 1.0)


def tdif_step(state: NeuronLayerState, current) -> np.ndarray:
    """Advance one tdIF step with ``c = 2**(T - t)`` for the step being taken."""
    return _step(state, current, 2.0 ** (state.T - state.t_now - 1))


def neuron_step(state: NeuronLayerState, current) -> np.ndarray:
    return if_step(state, current) if state.kind == IF else tdif_step(state, current)


def delay_spike_run(kind: str, theta: float, T: int, T_delay: int, currents, V0=None):
    """Run the two-stage delay-spike schedule for one layer.

    Stage 1 integrates the ``T`` input currents (scaled by ``c`` of the input
    step for tdIF). Once ``t > T_delay`` it emits output slot ``t - T_delay``
    against threshold ``c[slot] * theta``. Stage 2 then drains the remaining
    potential into slots ``T - T_delay + 1 .. T``, giving exactly ``T`` slots.

    Returns ``(spikes, residual)``. ``spikes`` has shape ``[T, *neurons]``
    and ``residual`` is the final accumulated potential.
    """
    kind = normalize_kind(kind)
    if not 0 <= T_delay <= T:
        raise ValueError(f"T_delay must lie in [0, T={T}], got {T_delay}")
    if theta <= 0:
        raise ValueError(f"theta must be > 0, got {theta}")
    currents = [as_tensor(c, "input_current") for c in currents]
    if len(currents) != T:
        raise ShapeError(f"expected {T} input currents, got {len(currents)}", dim="T")
    shape = currents[0].shape
    for c in currents:
        if c.shape != shape:
            raise ShapeError(f"current shapes differ: {c.shape} vs {shape}", dim="neurons")

    coeff = time_coefficients(kind, T)
    M = np.zeros(shape) if V0 is None else as_tensor(V0, "V0").copy()
    spikes = np.zeros((T,) + shape)

    def emit(slot):
        threshold = coeff[slot - 1] * theta
        s = fires(M, threshold)
        spikes[slot - 1] = s
        return threshold * s

    for t in range(1, T + 1):
        M += coeff[t - 1] * currents[t - 1]
        if t > T_delay:
            M -= emit(t - T_delay)
    for slot in range(T - T_delay + 1, T + 1):
        M -= emit(slot)
    return spikes, M
