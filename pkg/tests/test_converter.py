import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spikeconv.ann import AnnLayer, AnnModel, BnParams, QuantClipParams, ann_forward
from spikeconv.converter import convert, fuse_conv_bn
from spikeconv.engine import run_snn
from spikeconv.exceptions import ModelError
from spikeconv.fixtures import toy_model, random_ann
from spikeconv.tensor import conv2d


def test_fuse_identity_normalization():
    eps = 1e-3
    w = np.array([[1.0, -2.0], [0.5, 3.0]])
    bn = BnParams(gamma=1.0, beta=0.0, mu=0.0, sigma2=1 - eps, eps=eps)
    w_hat, b_hat = fuse_conv_bn(w, None, bn, 1.0, 1.0)
    np.testing.assert_allclose(w_hat, w, rtol=1e-15)
    np.testing.assert_array_equal(b_hat, [0.0, 0.0])


def test_fuse_hand_substitution():
    bn = BnParams(gamma=2.0, beta=1.0, mu=0.5, sigma2=3.99, eps=0.01)
    w_hat, b_hat = fuse_conv_bn([[1.0]], None, bn, 1.0, 2.0)
    assert w_hat.item() == pytest.approx(0.5, abs=1e-15)
    assert b_hat.tolist() == pytest.approx([0.25], abs=1e-15)


def test_fuse_without_bn_scales_only():
    w_hat, b_hat = fuse_conv_bn([[2.0, 4.0]], [1.0], None, 3.0, 2.0)
    assert w_hat.tolist() == [[3.0, 6.0]]
    assert b_hat.tolist() == [0.5]


def test_fuse_rejects_nonpositive_lambda():
    with pytest.raises(ValueError):
        fuse_conv_bn([[1.0]], None, None, 0.0, 1.0)


channels = st.integers(1, 3)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), channels, channels, st.integers(1, 3))
def test_fused_conv_equals_bn_of_conv_over_lambda(seed, cin, cout, k):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(cin, 5, 5))
    w = rng.normal(size=(cout, cin, k, k))
    b = rng.normal(size=cout)
    bn = BnParams(rng.uniform(0.2, 2, cout), rng.normal(size=cout), rng.normal(size=cout),
                  rng.uniform(0.1, 3, cout), 1e-5)
    lam_prev, lam_cur = rng.uniform(0.1, 4, 2)

    # unfused reference computed elementwise from the BN definition
    y = conv2d(x, w, b, padding=1)
    ref = np.empty_like(y)
    for c in range(cout):
        ref[c] = (bn.gamma[c] * (y[c] - bn.mu[c]) / math.sqrt(bn.sigma2[c] + bn.eps) + bn.beta[c]) / lam_cur

    w_hat, b_hat = fuse_conv_bn(w, b, bn, lam_prev, lam_cur)
    fused = conv2d(x / lam_prev, w_hat, b_hat, padding=1)
    np.testing.assert_allclose(fused, ref, atol=1e-9, rtol=1e-9)


def test_convert_unit_lambda_no_bn_keeps_weights():
    w1, w2 = np.array([[1.0, -0.5], [0.25, 2.0]]), np.array([[1.0, 1.0]])
    ann = AnnModel([AnnLayer("fc", w1, [0.1, 0.0], quant=QuantClipParams(1.0, 4)), AnnLayer("fc", w2, [0.0])])
    snn = convert(ann, 4, "IF")
    np.testing.assert_array_equal(snn.layers[0].weights, w1)
    np.testing.assert_array_equal(snn.layers[1].weights, w2)
    assert [layer.theta for layer in snn.layers] == [1.0, 1.0]
    assert snn.output_scale == 1.0
    assert snn.T_delay == 4


def test_convert_toy_gives_rate_04():
    snn = convert(toy_model(5), 5, "IF", 5)
    trace = run_snn(snn, [0.6, 0.4, 0.4])
    assert trace.rates[0].tolist() == pytest.approx([0.4], abs=1e-12)
    assert trace.residuals[0].tolist() == pytest.approx([0.0], abs=1e-12)
    assert trace.output.tolist() == pytest.approx([0.4], abs=1e-12)


def test_convert_random_three_layer_lossless(rng):
    for _ in range(20):
        T = int(rng.integers(2, 9))
        ann, x = random_ann(rng, T, template=("fc", "fc", "out"))
        snn = convert(ann, T, "IF", T)
        trace = run_snn(snn, x)
        ref = ann_forward(ann, x)
        for layer, rate in zip(snn.hidden_layers, trace.rates):
            np.testing.assert_allclose(rate * layer.scale, ref.activations[layer.source_index], atol=1e-5)
        np.testing.assert_allclose(trace.output, ref.output, atol=1e-5)


def test_output_scale_restores_ann_units():
    ann = AnnModel([AnnLayer("fc", [[1.0]], [0.0], quant=QuantClipParams(4.0, 4)), AnnLayer("fc", [[2.0]], [1.0])])
    snn = convert(ann, 4, "IF")
    assert snn.output_scale == 4.0
    assert run_snn(snn, [3.0]).output.tolist() == pytest.approx(ann_forward(ann, [3.0]).output.tolist())


def test_avgpool_merged_into_next_layer():
    ann = AnnModel(
        [
            AnnLayer("conv2d", np.ones((1, 1, 1, 1)), [0.0], quant=QuantClipParams(1.0, 2)),
            AnnLayer("avgpool", window=2, stride=2),
            AnnLayer("fc", np.ones((1, 4)), [0.0]),
        ]
    )
    snn = convert(ann, 2, "IF")
    assert len(snn.layers) == 2
    assert snn.layers[1].pre_pool == [(2, 2)]
    assert snn.layers[1].source_index == 2


def test_convert_errors():
    hidden_no_quant = AnnModel([AnnLayer("fc", [[1.0]]), AnnLayer("fc", [[1.0]])])
    with pytest.raises(ModelError, match="layer 0"):
        convert(hidden_no_quant, 4, "IF")
    pool_last = AnnModel([AnnLayer("fc", [[1.0]], quant=QuantClipParams(1.0, 2)), AnnLayer("avgpool", window=1)])
    with pytest.raises(ModelError, match="layer 1"):
        convert(pool_last, 2, "IF")
    with pytest.raises(ModelError):
        convert(toy_model(), 5, "IF", 6)
    with pytest.raises(ValueError):
        convert(toy_model(), 5, "LIF")
