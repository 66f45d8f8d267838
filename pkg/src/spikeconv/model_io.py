"""JSON model and tensor files.

ANN model file::

    {"format_version": 1,
     "input_shape": [C, H, W],                      # optional
     "layers": [
        {"kind": "conv2d", "weights": [...], "bias": [...], "stride": 1, "padding": 0,
         "bn": {"gamma": ..., "beta": ..., "mu": ..., "sigma2": ..., "eps": 1e-5},
         "lambda": 1.0, "L": 5},
        {"kind": "avgpool", "window": 2, "stride": 2},
        {"kind": "fc", "weights": [...], "bias": [...]}],
     "metadata": {"architecture": "..."}}

Hidden conv/fc layers carry ``lambda`` and ``L``; the last layer carries
neither. BN entries may be scalars or per-output-channel arrays.

SNN files (written by ``convert``) hold the fused weights, the neuron kind,
``T``, ``T_delay`` and ``output_scale``.

Tensor files are a nested JSON array, ``{"shape": [...], "data": [...]}``
with row-major flat data, or ``{"spikes": [[...], ...]}`` for a binary input
spike train with time as the leading axis.

:func:`dumps_canonical` fixes the textual layout, so saving a loaded
canonical file reproduces it byte for byte.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .ann import AnnLayer, AnnModel, BnParams, QuantClipParams
from .converter import SnnLayer, SnnModel
from .engine import SpikeTrain
from .exceptions import ModelError, SpikeConvError

FORMAT_VERSION = 1


class ModelFileError(ModelError):
    """A model or tensor file could not be parsed or failed validation."""


def dumps_canonical(obj, indent: int = 0) -> str:
    """JSON with dicts one key per line and innermost numeric lists inline."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps_canonical(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not any(isinstance(v, (list, tuple, dict)) for v in obj):
            return "[" + ", ".join(dumps_canonical(v) for v in obj) + "]"
        items = [inner + dumps_canonical(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, (bool, type(None), str)):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    return json.dumps(float(obj))


def _read_json(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ModelFileError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _write(path, doc) -> None:
    Path(path).write_text(dumps_canonical(doc) + "\n")


def _array(value, where: str, layer: int | None = None) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ModelFileError(f"{where}: not a rectangular numeric array", layer=layer) from exc
    if not np.all(np.isfinite(arr)):
        raise ModelFileError(f"{where} contains NaN or Inf", layer=layer)
    return arr


def _field(record: dict, key: str, layer: int, default=None, required: bool = False):
    if key not in record:
        if required:
            raise ModelFileError(f"missing field {key!r}", layer=layer)
        return default
    return record[key]


def _version(doc: dict, path) -> None:
    if not isinstance(doc, dict):
        raise ModelFileError(f"{path}: top level must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFileError(f"{path}: unsupported format_version {version!r}")
    if not isinstance(doc.get("layers"), list) or not doc["layers"]:
        raise ModelFileError(f"{path}: 'layers' must be a non-empty list")


def _bn_from(record, layer: int) -> BnParams | None:
    if record is None:
        return None
    try:
        return BnParams(
            gamma=_array(record["gamma"], "bn.gamma", layer),
            beta=_array(record["beta"], "bn.beta", layer),
            mu=_array(record["mu"], "bn.mu", layer),
            sigma2=_array(record["sigma2"], "bn.sigma2", layer),
            eps=float(record.get("eps", 1e-5)),
        )
    except KeyError as exc:
        raise ModelFileError(f"bn is missing field {exc.args[0]!r}", layer=layer) from None
    except ValueError as exc:
        raise ModelFileError(str(exc), layer=layer) from None


def _bn_to(bn: BnParams | None):
    if bn is None:
        return None

    def v(a):
        return a.tolist() if a.ndim else float(a)

    return {"gamma": v(bn.gamma), "beta": v(bn.beta), "mu": v(bn.mu), "sigma2": v(bn.sigma2), "eps": float(bn.eps)}


def ann_from_dict(doc: dict, path="<memory>") -> AnnModel:
    _version(doc, path)
    layers = []
    last = len(doc["layers"]) - 1
    for i, rec in enumerate(doc["layers"]):
        if not isinstance(rec, dict):
            raise ModelFileError("layer record must be an object", layer=i)
        kind = _field(rec, "kind", i, required=True)
        try:
            if kind == "avgpool":
                window = int(_field(rec, "window", i, required=True))
                layers.append(AnnLayer("avgpool", window=window, stride=int(rec.get("stride", window))))
                continue
            lam, L = rec.get("lambda"), rec.get("L")
            if i == last and (lam is not None or L is not None):
                raise ModelFileError("the output layer must not carry lambda or L", layer=i)
            if i != last and (lam is None or L is None):
                raise ModelFileError("hidden layer is missing lambda or L", layer=i)
            quant = None if lam is None else QuantClipParams(float(lam), int(L))
            weights = _array(_field(rec, "weights", i, required=True), "weights", i)
            bias = rec.get("bias")
            layers.append(
                AnnLayer(
                    kind,
                    weights=weights,
                    bias=None if bias is None else _array(bias, "bias", i),
                    stride=int(rec.get("stride", 1)),
                    padding=int(rec.get("padding", 0)),
                    bn=_bn_from(rec.get("bn"), i),
                    quant=quant,
                )
            )
        except SpikeConvError as exc:
            if isinstance(exc, ModelError) and exc.layer is not None:
                raise
            raise ModelFileError(str(exc), layer=i) from None
        except ValueError as exc:
            raise ModelFileError(str(exc), layer=i) from None
    shape = doc.get("input_shape")
    return AnnModel(layers, None if shape is None else tuple(int(s) for s in shape), dict(doc.get("metadata", {})))


def ann_to_dict(model: AnnModel) -> dict:
    layers = []
    for layer in model.layers:
        if layer.kind == "avgpool":
            layers.append({"kind": "avgpool", "window": layer.window, "stride": layer.stride})
            continue
        rec = {"kind": layer.kind, "weights": layer.weights.tolist(), "bias": layer.bias.tolist()}
        if layer.kind == "conv2d":
            rec["stride"], rec["padding"] = layer.stride, layer.padding
        if layer.bn is not None:
            rec["bn"] = _bn_to(layer.bn)
        if layer.quant is not None:
            rec["lambda"], rec["L"] = float(layer.quant.lam), int(layer.quant.L)
        layers.append(rec)
    doc = {"format_version": FORMAT_VERSION}
    if model.input_shape is not None:
        doc["input_shape"] = list(model.input_shape)
    doc["layers"] = layers
    doc["metadata"] = {str(k): str(v) for k, v in model.metadata.items()}
    return doc


def load_model(path) -> AnnModel:
    """Load and validate an ANN model file."""
    return ann_from_dict(_read_json(path), path)


def save_model(model: AnnModel, path) -> None:
    _write(path, ann_to_dict(model))


def snn_to_dict(model: SnnModel) -> dict:
    layers = []
    for layer in model.layers:
        rec = {"kind": layer.op, "role": layer.role, "weights": layer.weights.tolist(), "bias": layer.bias.tolist()}
        if layer.op == "conv2d":
            rec["stride"], rec["padding"] = layer.stride, layer.padding
        rec["pre_pool"] = [[int(w), int(s)] for w, s in layer.pre_pool]
        rec["theta"] = float(layer.theta)
        rec["scale"] = float(layer.scale)
        rec["source_index"] = int(layer.source_index)
        layers.append(rec)
    doc = {
        "format_version": FORMAT_VERSION,
        "model": "snn",
        "neuron": model.kind,
        "T": model.T,
        "T_delay": model.T_delay,
        "output_scale": float(model.output_scale),
    }
    if model.input_shape is not None:
        doc["input_shape"] = list(model.input_shape)
    doc["layers"] = layers
    doc["metadata"] = {str(k): str(v) for k, v in model.metadata.items()}
    return doc


def snn_from_dict(doc: dict, path="<memory>") -> SnnModel:
    _version(doc, path)
    if doc.get("model") != "snn":
        raise ModelFileError(f"{path}: not an SNN model file (expected \"model\": \"snn\")")
    layers = []
    for i, rec in enumerate(doc["layers"]):
        kind = _field(rec, "kind", i, required=True)
        if kind not in ("conv2d", "fc"):
            raise ModelFileError(f"unsupported SNN layer kind {kind!r}", layer=i)
        theta = float(rec.get("theta", 1.0))
        if not (math.isfinite(theta) and theta > 0):
            raise ModelFileError("theta must be a positive finite real", layer=i)
        layers.append(
            SnnLayer(
                op=kind,
                weights=_array(_field(rec, "weights", i, required=True), "weights", i),
                bias=_array(_field(rec, "bias", i, required=True), "bias", i),
                stride=int(rec.get("stride", 1)),
                padding=int(rec.get("padding", 0)),
                pre_pool=[(int(w), int(s)) for w, s in rec.get("pre_pool", [])],
                theta=theta,
                role=str(rec.get("role", "hidden")),
                scale=float(rec.get("scale", 1.0)),
                source_index=int(rec.get("source_index", i)),
            )
        )
    shape = doc.get("input_shape")
    try:
        return SnnModel(
            layers=layers,
            T=int(doc["T"]),
            T_delay=int(doc["T_delay"]),
            kind=str(doc["neuron"]),
            output_scale=float(doc.get("output_scale", 1.0)),
            input_shape=None if shape is None else tuple(int(s) for s in shape),
            metadata=dict(doc.get("metadata", {})),
        )
    except KeyError as exc:
        raise ModelFileError(f"{path}: missing field {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ModelFileError(f"{path}: {exc}") from None


def load_snn(path) -> SnnModel:
    return snn_from_dict(_read_json(path), path)


def save_snn(model: SnnModel, path) -> None:
    _write(path, snn_to_dict(model))


def tensor_from_json(doc, where: str = "tensor"):
    """Decode a tensor document; returns an ndarray or a :class:`SpikeTrain`."""
    if isinstance(doc, dict):
        if "spikes" in doc:
            try:
                return SpikeTrain(_array(doc["spikes"], f"{where}.spikes"))
            except SpikeConvError as exc:
                raise ModelFileError(f"{where}: {exc}") from None
        if "data" in doc:
            data = _array(doc["data"], f"{where}.data").reshape(-1)
            shape = tuple(int(s) for s in doc.get("shape", [data.size]))
            if int(np.prod(shape)) != data.size:
                raise ModelFileError(f"{where}: data length {data.size} does not match shape {list(shape)}")
            return data.reshape(shape)
        raise ModelFileError(f"{where}: expected 'spikes' or 'data'")
    return _array(doc, where)


def load_tensor(path):
    return tensor_from_json(_read_json(path), str(path))


def save_tensor(x, path) -> None:
    if isinstance(x, SpikeTrain):
        doc = {"spikes": x.values.astype(int).tolist()}
    else:
        doc = np.asarray(x, dtype=np.float64).tolist()
    _write(path, doc)
