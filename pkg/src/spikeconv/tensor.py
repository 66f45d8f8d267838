"""Dense linear-algebra substrate shared by the ANN and SNN paths.

Tensors are plain ``numpy.ndarray`` objects in row-major order. Every public
operation promotes its operands to float64 and rejects non-finite values.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import NonFiniteError, ShapeError


def as_tensor(x, name: str = "tensor") -> np.ndarray:
    """Return ``x`` as a finite float64 array (copy only when needed)."""
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains NaN or Inf")
    return arr


def conv_output_size(size: int, kernel: int, stride: int, padding: int) -> int:
    return (size + 2 * padding - kernel) // stride + 1


def _check_conv(x: np.ndarray, kernel: np.ndarray, bias, stride: int, padding: int):
    if stride < 1:
        raise ShapeError(f"stride must be >= 1, got {stride}", dim="stride")
    if padding < 0:
        raise ShapeError(f"padding must be >= 0, got {padding}", dim="padding")
    if kernel.ndim != 4:
        raise ShapeError(f"kernel must be [Cout,Cin,kH,kW], got shape {kernel.shape}", dim="kernel")
    if x.shape[-3] != kernel.shape[1]:
        raise ShapeError(
            f"input has {x.shape[-3]} channels but kernel expects {kernel.shape[1]}", dim="Cin"
        )
    if bias is not None and bias.shape != (kernel.shape[0],):
        raise ShapeError(f"bias shape {bias.shape} does not match Cout={kernel.shape[0]}", dim="Cout")
    for label, size, k in (("H", x.shape[-2], kernel.shape[2]), ("W", x.shape[-1], kernel.shape[3])):
        if size + 2 * padding < k:
            raise ShapeError(f"kernel size {k} exceeds padded input {label}={size + 2 * padding}", dim=label)


def _conv2d_batch(x: np.ndarray, kernel: np.ndarray, stride: int, padding: int) -> np.ndarray:
    # x: [N, Cin, H, W] -> [N, Cout, H', W']; no bias, no validation.
    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    kh, kw = kernel.shape[2:]
    win = sliding_window_view(x, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    return np.einsum("ncijab,ocab->noij", win, kernel, optimize=True)


def conv2d(x, kernel, bias=None, stride: int = 1, padding: int = 0) -> np.ndarray:
    """Cross-correlate ``x`` [Cin,H,W] with ``kernel`` [Cout,Cin,kH,kW].

    Zero padding is applied on both spatial borders. Output spatial size is
    ``(H + 2*padding - kH) // stride + 1`` (likewise for W).
    """
    x = as_tensor(x, "input")
    kernel = as_tensor(kernel, "kernel")
    bias = None if bias is None else as_tensor(bias, "bias")
    if x.ndim != 3:
        raise ShapeError(f"conv2d input must be [Cin,H,W], got shape {x.shape}", dim="input")
    _check_conv(x, kernel, bias, stride, padding)
    out = _conv2d_batch(x[None], kernel, stride, padding)[0]
    if bias is not None:
        out = out + bias[:, None, None]
    return out


def fully_connected(x, weights, bias=None) -> np.ndarray:
    """Affine map ``weights @ x + bias``; ``x`` is flattened first."""
    x = as_tensor(x, "input").reshape(-1)
    weights = as_tensor(weights, "weights")
    if weights.ndim != 2:
        raise ShapeError(f"weights must be [M,N], got shape {weights.shape}", dim="weights")
    if weights.shape[1] != x.shape[0]:
        raise ShapeError(f"weights expect N={weights.shape[1]} inputs, got {x.shape[0]}", dim="N")
    out = weights @ x
    if bias is not None:
        bias = as_tensor(bias, "bias")
        if bias.shape != (weights.shape[0],):
            raise ShapeError(f"bias shape {bias.shape} does not match M={weights.shape[0]}", dim="M")
        out = out + bias
    return out


def avg_pool2d(x, window: int, stride: int | None = None) -> np.ndarray:
    """Mean over non-padded ``window`` x ``window`` patches (floor semantics)."""
    stride = window if stride is None else stride
    x = as_tensor(x, "input")
    if window < 1 or stride < 1:
        raise ShapeError(f"window and stride must be >= 1, got {window}, {stride}", dim="window")
    if x.ndim != 3:
        raise ShapeError(f"avg_pool2d input must be [C,H,W], got shape {x.shape}", dim="input")
    if window > x.shape[1] or window > x.shape[2]:
        raise ShapeError(f"window {window} larger than input {x.shape[1:]}", dim="window")
    win = sliding_window_view(x, (window, window), axis=(1, 2))[:, ::stride, ::stride]
    return win.mean(axis=(-2, -1))
