"""Seeded model and input generators for tests, demos and the CLI.

``random_ann`` draws small conv/fc/avgpool networks with random BN and
calibrates each hidden layer's lambda to the largest pre-activation seen on
the evaluation input times a ``headroom`` factor. A headroom >= 1 keeps every
neuron below saturation; a headroom < 1 exercises the upper clip.
"""

from __future__ import annotations

import numpy as np

from .ann import AnnLayer, AnnModel, BnParams, QuantClipParams, quant_clip
from .tensor import conv_output_size

DEFAULT_SEED = 0

TOY_RATES = (0.6, 0.4, 0.4)
TOY_WEIGHTS = (1.0, 0.5, -1.0)
TOY_T = 5

_TEMPLATES = (
    ("fc", "out"),
    ("fc", "fc", "out"),
    ("fc", "fc", "fc", "out"),
    ("conv", "out"),
    ("conv", "pool", "out"),
    ("conv", "pool", "fc", "out"),
    ("conv", "conv", "out"),
    ("conv", "conv", "fc", "out"),
    ("conv", "pool", "conv", "out"),
    ("pool", "conv", "fc", "out"),
)


def toy_model(T: int = TOY_T) -> AnnModel:
    """One hidden neuron with weights [1, 0.5, -1], lambda 1, followed by an identity readout."""
    return AnnModel(
        [
            AnnLayer("fc", [list(TOY_WEIGHTS)], [0.0], quant=QuantClipParams(1.0, T)),
            AnnLayer("fc", [[1.0]], [0.0]),
        ],
        input_shape=(len(TOY_WEIGHTS),),
        metadata={"architecture": "toy"},
    )


def _random_bn(rng: np.random.Generator, n: int) -> BnParams:
    return BnParams(
        gamma=rng.uniform(0.5, 1.5, n),
        beta=rng.uniform(-0.3, 0.3, n),
        mu=rng.uniform(-0.2, 0.2, n),
        sigma2=rng.uniform(0.5, 2.0, n),
        eps=1e-5,
    )


def _spatial_input(rng):
    return (int(rng.integers(1, 3)), int(rng.integers(5, 9)))


def random_ann(rng: np.random.Generator, L: int, *, headroom=(1.05, 1.5), max_neurons: int = 64,
               bn_probability: float = 0.7, template=None):
    """Draw ``(model, x)``: a random quant-clip ANN and the input it was calibrated on."""
    template = template or _TEMPLATES[int(rng.integers(len(_TEMPLATES)))]
    spatial = any(kind in ("conv", "pool") for kind in template)
    if spatial:
        channels, size = _spatial_input(rng)
        shape = (channels, size, size)
    else:
        shape = (int(rng.integers(2, 17)),)
    x = rng.uniform(0.0, 1.0, shape)

    layers: list[AnnLayer] = []
    a = x
    cur_shape = shape
    for position, kind in enumerate(template):
        is_out = kind == "out"
        if kind == "pool":
            window = 2 if min(cur_shape[1:]) >= 2 else 1
            layer = AnnLayer("avgpool", window=window, stride=window)
        elif kind == "conv":
            cin, h, _ = cur_shape
            k = int(rng.integers(1, 4))
            pad = int(rng.integers(0, 2)) if k > 1 else 0
            k = min(k, h + 2 * pad)
            out_hw = conv_output_size(h, k, 1, pad)
            cout = max(1, min(int(rng.integers(2, 5)), max_neurons // (out_hw * out_hw)))
            if cout * out_hw * out_hw > max_neurons:
                k, pad = min(3, h), 0
                out_hw = conv_output_size(h, k, 1, pad)
                cout = max(1, max_neurons // (out_hw * out_hw))
            fan_in = cin * k * k
            w = rng.normal(0.0, 1.6 / np.sqrt(fan_in), (cout, cin, k, k))
            layer = AnnLayer("conv2d", w, rng.uniform(-0.2, 0.2, cout), stride=1, padding=pad)
        else:
            n_in = int(np.prod(cur_shape))
            n_out = int(rng.integers(1, 9)) if is_out else int(rng.integers(2, max_neurons + 1))
            w = rng.normal(0.0, 1.6 / np.sqrt(n_in), (n_out, n_in))
            layer = AnnLayer("fc", w, rng.uniform(-0.2, 0.2, n_out))
        if layer.kind != "avgpool" and rng.random() < bn_probability:
            layer.bn = _random_bn(rng, layer.n_out_channels)

        y = layer.linear(a)
        if layer.bn is not None:
            y = layer.bn.apply(y)
        if layer.kind != "avgpool" and not is_out:
            peak = float(np.max(y))
            lam = peak * rng.uniform(*headroom) if peak > 1e-3 else float(rng.uniform(0.5, 1.0))
            layer.quant = QuantClipParams(lam, L)
            y = quant_clip(y, lam, L)
        layers.append(layer)
        a = np.asarray(y)
        cur_shape = a.shape
        if position == len(template) - 1:
            break

    model = AnnModel(layers, input_shape=shape, metadata={"architecture": "random-" + "-".join(template)})
    return model, x


def random_suite(seed: int, count: int, L_for_T, T_values, **kwargs):
    """Yield ``(T, model, x)`` for ``count`` random models, cycling through ``T_values``.

    ``L_for_T`` maps the SNN time-steps to the ANN quantization level (``T``
    for IF, ``2**T - 1`` for tdIF).
    """
    rng = np.random.default_rng(seed)
    T_values = list(T_values)
    for i in range(count):
        T = T_values[i % len(T_values)]
        model, x = random_ann(rng, L_for_T(T), **kwargs)
        yield T, model, x
