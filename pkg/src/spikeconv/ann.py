"""Reference forward pass of the source ANN with quant-clip activations.

The activation of every hidden layer is

    quant_clip(x) = lam * clip(floor(x * L / lam) / L, 0, 1)

so hidden outputs live on the lattice ``{0, lam/L, ..., lam}``. The final
layer has no activation; its pre-activation is the network output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ModelError, NonFiniteError
from .tensor import as_tensor, avg_pool2d, conv2d, fully_connected

# Values of x*L/lam closer than this to an integer are snapped before flooring.
SNAP_TOL = 1e-12

LAYER_KINDS = ("conv2d", "fc", "avgpool")


@dataclass(frozen=True)
class QuantClipParams:
    lam: float
    L: int

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"lambda must be a positive finite real, got {self.lam}")
        if int(self.L) != self.L or self.L < 1:
            raise ValueError(f"L must be an integer >= 1, got {self.L}")


@dataclass
class BnParams:
    """Inference-time batch norm statistics, scalars or per-output-channel arrays."""

    gamma: np.ndarray
    beta: np.ndarray
    mu: np.ndarray
    sigma2: np.ndarray
    eps: float = 1e-5

    def __post_init__(self):
        self.gamma = as_tensor(self.gamma, "bn.gamma")
        self.beta = as_tensor(self.beta, "bn.beta")
        self.mu = as_tensor(self.mu, "bn.mu")
        self.sigma2 = as_tensor(self.sigma2, "bn.sigma2")
        if not np.all(self.sigma2 + self.eps > 0):
            raise ValueError("bn: sigma2 + eps must be > 0")

    def std(self) -> np.ndarray:
        return np.sqrt(self.sigma2 + self.eps)

    def apply(self, y: np.ndarray) -> np.ndarray:
        """Normalize ``y`` whose leading axis is the channel axis."""
        extra = (1,) * (y.ndim - 1)

        def bc(v):
            return v.reshape(v.shape + extra) if v.ndim else v

        return bc(self.gamma) * (y - bc(self.mu)) / bc(self.std()) + bc(self.beta)


@dataclass
class AnnLayer:
    """One layer of the source network.

    ``kind`` is ``"conv2d"``, ``"fc"`` or ``"avgpool"``. Conv layers use
    ``weights`` [Cout,Cin,kH,kW]; fc layers use ``weights`` [M,N] and flatten
    their input. Avgpool layers use ``window``/``stride`` and carry no
    parameters.
    """

    kind: str
    weights: np.ndarray | None = None
    bias: np.ndarray | None = None
    stride: int = 1
    padding: int = 0
    window: int = 2
    bn: BnParams | None = None
    quant: QuantClipParams | None = None

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ModelError(f"unsupported layer kind {self.kind!r}")
        if self.kind == "avgpool":
            if self.weights is not None or self.bn is not None or self.quant is not None:
                raise ModelError("avgpool layers carry no weights, BN or activation")
            return
        if self.weights is None:
            raise ModelError(f"{self.kind} layer needs weights")
        self.weights = as_tensor(self.weights, "weights")
        expected_ndim = 4 if self.kind == "conv2d" else 2
        if self.weights.ndim != expected_ndim:
            raise ModelError(f"{self.kind} weights must be {expected_ndim}-D, got shape {self.weights.shape}")
        n_out = self.weights.shape[0]
        self.bias = np.zeros(n_out) if self.bias is None else as_tensor(self.bias, "bias")
        if self.bias.shape != (n_out,):
            raise ModelError(f"bias shape {self.bias.shape} does not match {n_out} outputs")

    @property
    def n_out_channels(self) -> int:
        return self.weights.shape[0]

    def linear(self, x: np.ndarray) -> np.ndarray:
        """Apply the layer's linear map (with its own bias, before BN)."""
        if self.kind == "conv2d":
            return conv2d(x, self.weights, self.bias, self.stride, self.padding)
        if self.kind == "fc":
            return fully_connected(x, self.weights, self.bias)
        return avg_pool2d(x, self.window, self.stride)


@dataclass
class AnnModel:
    layers: list[AnnLayer]
    input_shape: tuple[int, ...] | None = None
    metadata: dict[str, str] = field(default_factory=dict)


@dataclass
class AnnResult:
    """Per-layer outputs of :func:`ann_forward`.

    ``activations[i]`` is the output of layer ``i`` for every layer except the
    last; ``preactivations[i]`` is the (BN-normalized) input to its
    activation. ``output`` is the raw pre-activation of the final layer.
    """

    activations: list[np.ndarray]
    preactivations: list[np.ndarray]
    output: np.ndarray


def _snapped_floor(y: np.ndarray) -> np.ndarray:
    nearest = np.rint(y)
    return np.where(np.abs(y - nearest) <= SNAP_TOL, nearest, np.floor(y))


def quant_clip(x, lam: float, L: int):
    """Quantize-and-clip activation; accepts scalars or arrays."""
    QuantClipParams(lam, L)
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("quant_clip input contains NaN or Inf")
    out = lam * np.clip(_snapped_floor(arr * L / lam) / L, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def ann_forward(model: AnnModel, x) -> AnnResult:
    """Run the reference ANN on a single sample."""
    a = as_tensor(x, "input")
    if model.input_shape is not None and tuple(a.shape) != tuple(model.input_shape):
        a = a.reshape(model.input_shape) if a.size == math.prod(model.input_shape) else a
    activations, preacts = [], []
    last = len(model.layers) - 1
    for i, layer in enumerate(model.layers):
        y = layer.linear(a)
        if layer.bn is not None:
            y = layer.bn.apply(y)
        if i == last:
            return AnnResult(activations, preacts, y)
        preacts.append(y)
        a = quant_clip(y, layer.quant.lam, layer.quant.L) if layer.quant is not None else y
        a = np.asarray(a, dtype=np.float64)
        activations.append(a)
    raise ModelError("model has no layers")
