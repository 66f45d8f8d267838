import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spikeconv.ann import AnnLayer, AnnModel, BnParams, QuantClipParams, ann_forward, quant_clip
from spikeconv.exceptions import ModelError, NonFiniteError
from spikeconv.fixtures import toy_model

finite = st.floats(-1e3, 1e3, allow_nan=False)
lams = st.floats(0.01, 100)
levels = st.integers(1, 64)


def quant_clip_oracle(x, lam, L):
    """Exact rational evaluation of lam * clip(floor(x*L/lam)/L, 0, 1)."""
    q = math.floor(Fraction(x) * L / Fraction(lam))
    return float(Fraction(lam) * min(max(Fraction(q, L), 0), 1))


@pytest.mark.parametrize(
    "x,lam,L,expected",
    [(0.4, 1.0, 5, 0.4), (-0.3, 2.0, 7, 0.0), (-0.3, 0.1, 1, 0.0), (1.7, 1.0, 4, 1.0), (0.5, 1.0, 3, 1 / 3)],
)
def test_quant_clip_examples(x, lam, L, expected):
    assert quant_clip(x, lam, L) == pytest.approx(expected, abs=1e-15)


def test_quant_clip_snaps_near_integer_boundaries():
    # 0.1 * 3 / 0.3 evaluates to 0.9999999999999998 in floating point
    assert quant_clip(0.1, 0.3, 3) == pytest.approx(0.1)


def test_quant_clip_rejects_bad_params():
    with pytest.raises(ValueError):
        quant_clip(1.0, 0.0, 4)
    with pytest.raises(ValueError):
        quant_clip(1.0, 1.0, 0)
    with pytest.raises(NonFiniteError):
        quant_clip(float("nan"), 1.0, 4)


@given(finite, lams, levels)
def test_quant_clip_matches_rational_oracle(x, lam, L):
    y = Fraction(x) * L / Fraction(lam)
    if abs(y - round(y)) < 1e-9:
        return  # boundary snapping is tested separately
    assert quant_clip(x, lam, L) == pytest.approx(quant_clip_oracle(x, lam, L), rel=1e-12, abs=1e-300)


@given(finite, lams, levels)
def test_quant_clip_output_on_lattice(x, lam, L):
    v = quant_clip(x, lam, L)
    k = v * L / lam
    assert abs(k - round(k)) < 1e-9 and 0 <= round(k) <= L


@given(finite, finite, lams, levels)
def test_quant_clip_monotone(x, y, lam, L):
    lo, hi = sorted((x, y))
    assert quant_clip(lo, lam, L) <= quant_clip(hi, lam, L)


@given(finite, lams, levels)
def test_quant_clip_idempotent(x, lam, L):
    v = quant_clip(x, lam, L)
    assert quant_clip(v, lam, L) == v


def test_ann_forward_toy():
    result = ann_forward(toy_model(), [0.6, 0.4, 0.4])
    assert result.activations[0].tolist() == pytest.approx([0.4])
    assert result.output.tolist() == pytest.approx([0.4])


def test_ann_forward_zero_input_zero_bias():
    model = AnnModel(
        [
            AnnLayer("conv2d", np.ones((2, 1, 3, 3)), np.zeros(2), padding=1, quant=QuantClipParams(1.0, 4)),
            AnnLayer("avgpool", window=2, stride=2),
            AnnLayer("fc", np.ones((3, 8)), np.zeros(3), quant=QuantClipParams(2.0, 4)),
            AnnLayer("fc", np.ones((1, 3)), np.zeros(1)),
        ]
    )
    result = ann_forward(model, np.zeros((1, 4, 4)))
    assert all(np.all(a == 0) for a in result.activations)
    assert result.output.tolist() == [0.0]


def test_ann_forward_matches_hand_composition(rng):
    for _ in range(25):
        w1, b1 = rng.normal(size=(6, 4)), rng.normal(size=6)
        w2, b2 = rng.normal(size=(3, 6)), rng.normal(size=3)
        bn = BnParams(rng.uniform(0.5, 2, 6), rng.normal(size=6), rng.normal(size=6), rng.uniform(0.1, 2, 6), 1e-3)
        lam, L = rng.uniform(0.5, 2), int(rng.integers(1, 16))
        x = rng.uniform(0, 1, 4)
        model = AnnModel(
            [AnnLayer("fc", w1, b1, bn=bn, quant=QuantClipParams(lam, L)), AnnLayer("fc", w2, b2)]
        )
        got = ann_forward(model, x)

        hidden = []
        for i in range(6):
            pre = sum(w1[i, j] * x[j] for j in range(4)) + b1[i]
            pre = bn.gamma[i] * (pre - bn.mu[i]) / math.sqrt(bn.sigma2[i] + bn.eps) + bn.beta[i]
            hidden.append(quant_clip_oracle(pre, lam, L))
        out = [sum(w2[k, i] * hidden[i] for i in range(6)) + b2[k] for k in range(3)]
        np.testing.assert_allclose(got.activations[0], hidden, atol=1e-9)
        np.testing.assert_allclose(got.output, out, atol=1e-9)


def test_hidden_activations_on_lattice(rng):
    from spikeconv.fixtures import random_ann

    for _ in range(30):
        model, x = random_ann(rng, int(rng.integers(1, 20)))
        result = ann_forward(model, x)
        for layer, act in zip(model.layers, result.activations):
            if layer.quant is None:
                continue
            k = act * layer.quant.L / layer.quant.lam
            assert np.all(np.abs(k - np.rint(k)) < 1e-9)
            assert np.all((np.rint(k) >= 0) & (np.rint(k) <= layer.quant.L))


def test_layer_validation():
    with pytest.raises(ModelError):
        AnnLayer("maxpool")
    with pytest.raises(ModelError):
        AnnLayer("fc", np.ones((2, 3)), np.ones(3))
    with pytest.raises(ModelError):
        AnnLayer("avgpool", np.ones((1, 1)))
