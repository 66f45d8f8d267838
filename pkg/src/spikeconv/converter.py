"""Fold BN statistics and activation scales into weights and emit an SNN.

For a hidden layer with scale ``lam_cur`` fed by a layer with scale
``lam_prev``, per output channel::

    W_hat = lam_prev * gamma / (lam_cur * sqrt(sigma2 + eps)) * W
    B_hat = gamma * (b - mu) / (lam_cur * sqrt(sigma2 + eps)) + beta / lam_cur

so every hidden threshold becomes 1. A conv bias ``b`` is folded through BN
together with ``mu``; with ``b = 0`` this is exactly the textbook fusion.

The output layer has no activation. It is normalized by ``lam_prev``
instead of its own scale, and ``SnnModel.output_scale = lam_prev`` restores
source-ANN units at decode time.

Average-pool layers are not emitted as SNN layers. They are merged into the
synaptic operator of the next conv/fc layer (``SnnLayer.pre_pool``), which
keeps every inter-layer payload binary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ann import AnnModel, BnParams
from .exceptions import ModelError
from .neurons import normalize_kind
from .tensor import as_tensor, avg_pool2d, conv2d, fully_connected


@dataclass
class SnnLayer:
    op: str
    weights: np.ndarray
    bias: np.ndarray
    stride: int = 1
    padding: int = 0
    pre_pool: list[tuple[int, int]] = field(default_factory=list)
    theta: float = 1.0
    role: str = "hidden"
    scale: float = 1.0
    source_index: int = 0

    @property
    def is_output(self) -> bool:
        return self.role == "output"

    def pooled(self, x: np.ndarray) -> np.ndarray:
        for window, stride in self.pre_pool:
            x = avg_pool2d(x, window, stride)
        return x

    def current(self, x: np.ndarray, with_bias: bool = True) -> np.ndarray:
        """Synaptic current ``W_hat @ pool(x) + B_hat`` for one time-step."""
        x = self.pooled(x)
        bias = self.bias if with_bias else None
        if self.op == "conv2d":
            return conv2d(x, self.weights, bias, self.stride, self.padding)
        return fully_connected(x, self.weights, bias)


@dataclass
class SnnModel:
    layers: list[SnnLayer]
    T: int
    T_delay: int
    kind: str
    output_scale: float = 1.0
    input_shape: tuple[int, ...] | None = None
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.kind = normalize_kind(self.kind)
        if self.T < 1:
            raise ModelError(f"T must be >= 1, got {self.T}")
        if not 0 <= self.T_delay <= self.T:
            raise ModelError(f"T_delay must lie in [0, T={self.T}], got {self.T_delay}")
        if not self.layers or not self.layers[-1].is_output:
            raise ModelError("the last SNN layer must be the output layer")

    @property
    def hidden_layers(self) -> list[SnnLayer]:
        return [layer for layer in self.layers if not layer.is_output]


def fuse_conv_bn(weights, bias, bn: BnParams | None, lambda_prev: float, lambda_cur: float):
    """Return ``(W_hat, B_hat)`` for one conv/fc layer."""
    if not (lambda_prev > 0 and lambda_cur > 0):
        raise ValueError(f"lambda_prev and lambda_cur must be > 0, got {lambda_prev}, {lambda_cur}")
    weights = as_tensor(weights, "weights")
    n_out = weights.shape[0]
    bias = np.zeros(n_out) if bias is None else as_tensor(bias, "bias")
    if bn is None:
        gain = np.ones(n_out)
        shift = bias
    else:
        denom = bn.sigma2 + bn.eps
        if np.any(denom <= 0):
            raise ValueError("sigma2 + eps must be > 0")
        gain = np.broadcast_to(bn.gamma / np.sqrt(denom), (n_out,))
        shift = gain * (bias - bn.mu) + bn.beta
    channel = (n_out,) + (1,) * (weights.ndim - 1)
    w_hat = (lambda_prev * gain / lambda_cur).reshape(channel) * weights
    b_hat = np.broadcast_to(shift / lambda_cur, (n_out,)).astype(np.float64)
    return w_hat, b_hat


def convert(ann: AnnModel, T: int, kind: str, T_delay: int | None = None) -> SnnModel:
    """Convert a quant-clip ANN into an :class:`SnnModel` with unit thresholds.

    ``T_delay`` defaults to ``T`` (full delay), the lossless configuration.
    """
    kind = normalize_kind(kind)
    T_delay = T if T_delay is None else T_delay
    if T < 1:
        raise ModelError(f"T must be >= 1, got {T}")
    if not 0 <= T_delay <= T:
        raise ModelError(f"T_delay must lie in [0, T={T}], got {T_delay}")
    if not ann.layers:
        raise ModelError("model has no layers")

    last = len(ann.layers) - 1
    lam_prev = 1.0
    pending_pool: list[tuple[int, int]] = []
    layers: list[SnnLayer] = []
    for i, layer in enumerate(ann.layers):
        if layer.kind == "avgpool":
            if i == last:
                raise ModelError("the output layer must be conv2d or fc, not avgpool", layer=i)
            pending_pool.append((layer.window, layer.stride))
            continue
        if i == last:
            if layer.quant is not None:
                raise ModelError("the output layer must not carry a quant-clip activation", layer=i)
            role, lam_cur = "output", lam_prev
        else:
            if layer.quant is None:
                raise ModelError("hidden layer is missing lambda/L", layer=i)
            role, lam_cur = "hidden", layer.quant.lam
        w_hat, b_hat = fuse_conv_bn(layer.weights, layer.bias, layer.bn, lam_prev, lam_cur)
        layers.append(
            SnnLayer(
                op=layer.kind,
                weights=w_hat,
                bias=b_hat,
                stride=layer.stride,
                padding=layer.padding,
                pre_pool=pending_pool,
                theta=1.0,
                role=role,
                scale=lam_cur,
                source_index=i,
            )
        )
        pending_pool = []
        lam_prev = lam_cur

    return SnnModel(
        layers=layers,
        T=T,
        T_delay=T_delay,
        kind=kind,
        output_scale=lam_prev,
        input_shape=ann.input_shape,
        metadata=dict(ann.metadata),
    )
