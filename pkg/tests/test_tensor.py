import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spikeconv.exceptions import NonFiniteError, ShapeError
from spikeconv.tensor import avg_pool2d, conv2d, fully_connected


def conv2d_loops(x, k, b, stride, padding):
    """Independent oracle: explicit loops over every output element."""
    cin, h, w = x.shape
    cout, _, kh, kw = k.shape
    ho = (h + 2 * padding - kh) // stride + 1
    wo = (w + 2 * padding - kw) // stride + 1
    out = np.zeros((cout, ho, wo))
    for o in range(cout):
        for i in range(ho):
            for j in range(wo):
                acc = b[o]
                for c in range(cin):
                    for a in range(kh):
                        for d in range(kw):
                            r, s = i * stride + a - padding, j * stride + d - padding
                            if 0 <= r < h and 0 <= s < w:
                                acc += x[c, r, s] * k[o, c, a, d]
                out[o, i, j] = acc
    return out


def fc_loops(x, w, b):
    out = []
    for i in range(w.shape[0]):
        acc = b[i]
        for j in range(w.shape[1]):
            acc += w[i, j] * x[j]
        out.append(acc)
    return np.array(out)


def test_conv_identity_kernel():
    assert conv2d([[[5.0]]], [[[[1.0]]]], [0.0]).tolist() == [[[5.0]]]


def test_conv_zero_input_gives_bias(rng):
    k = rng.normal(size=(3, 2, 2, 2))
    out = conv2d(np.zeros((2, 4, 4)), k, [1.5, -2.0, 0.25], padding=1)
    for channel, b in zip(out, [1.5, -2.0, 0.25]):
        assert np.all(channel == b)


def test_conv_ones_sum():
    assert conv2d(np.ones((1, 3, 3)), np.ones((1, 1, 3, 3)), [0.0]).tolist() == [[[9.0]]]


@pytest.mark.parametrize("stride,padding", [(1, 0), (1, 1), (2, 0), (2, 1), (3, 2)])
def test_conv_matches_loop_oracle(rng, stride, padding):
    x = rng.normal(size=(2, 7, 6))
    k = rng.normal(size=(3, 2, 3, 2))
    b = rng.normal(size=3)
    np.testing.assert_allclose(conv2d(x, k, b, stride, padding), conv2d_loops(x, k, b, stride, padding), atol=1e-12)


def test_conv_output_size():
    assert conv2d(np.ones((1, 8, 8)), np.ones((4, 1, 3, 3)), np.zeros(4), stride=2, padding=1).shape == (4, 4, 4)


def test_conv_channel_mismatch_names_dimension():
    with pytest.raises(ShapeError) as info:
        conv2d(np.ones((2, 3, 3)), np.ones((1, 3, 1, 1)), [0.0])
    assert info.value.dim == "Cin"


def test_conv_kernel_too_large():
    with pytest.raises(ShapeError) as info:
        conv2d(np.ones((1, 2, 5)), np.ones((1, 1, 3, 3)), [0.0])
    assert info.value.dim == "H"


def test_conv_rejects_nan():
    with pytest.raises(NonFiniteError):
        conv2d(np.full((1, 2, 2), np.nan), np.ones((1, 1, 1, 1)), [0.0])


@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**16))
@settings(max_examples=50, deadline=None)
def test_conv_linearity(a, b, seed):
    r = np.random.default_rng(seed)
    x, y = r.normal(size=(2, 2, 5, 5))
    k = r.normal(size=(2, 2, 3, 3))
    lhs = conv2d(a * x + b * y, k, padding=1)
    rhs = a * conv2d(x, k, padding=1) + b * conv2d(y, k, padding=1)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-6, atol=1e-9)


def test_fc_toy_case():
    np.testing.assert_allclose(fully_connected([0.6, 0.4, 0.4], [[1, 0.5, -1]], [0]), [0.4], atol=1e-15)


def test_fc_identity(rng):
    x = rng.normal(size=5)
    assert np.array_equal(fully_connected(x, np.eye(5), np.zeros(5)), x)


def test_fc_hand_sum():
    assert fully_connected([1, 2], [[2, 0], [0, 3]], [1, 1]).tolist() == [3.0, 7.0]


def test_fc_matches_loop_oracle(rng):
    for _ in range(20):
        n, m = rng.integers(1, 30, size=2)
        x, w, b = rng.normal(size=n), rng.normal(size=(m, n)), rng.normal(size=m)
        np.testing.assert_allclose(fully_connected(x, w, b), fc_loops(x, w, b), atol=1e-6)


def test_fc_dimension_mismatch():
    with pytest.raises(ShapeError) as info:
        fully_connected([1, 2, 3], [[1, 2]], [0])
    assert info.value.dim == "N"


def test_pool_constant():
    assert np.all(avg_pool2d(np.full((2, 6, 6), 0.75), 3) == 0.75)
    np.testing.assert_allclose(avg_pool2d(np.full((2, 6, 6), 0.7), 3), 0.7, rtol=1e-15)


def test_pool_direct_mean():
    assert avg_pool2d([[[1.0, 2.0], [3.0, 4.0]]], 2).tolist() == [[[2.5]]]


def test_pool_window_one_is_identity(rng):
    x = rng.normal(size=(1, 1, 1))
    assert np.array_equal(avg_pool2d(x, 1), x)


def test_pool_floor_semantics():
    assert avg_pool2d(np.ones((1, 5, 5)), 2).shape == (1, 2, 2)


def test_pool_window_too_large():
    with pytest.raises(ShapeError):
        avg_pool2d(np.ones((1, 2, 2)), 3)


@given(st.integers(-8, 8), st.integers(0, 2**16))
def test_pool_commutes_with_power_of_two_scaling(exponent, seed):
    # exact in binary floating point for power-of-two scalars
    x = np.random.default_rng(seed).normal(size=(2, 6, 6))
    c = 2.0**exponent
    assert np.array_equal(avg_pool2d(c * x, 2), c * avg_pool2d(x, 2))


@given(st.floats(-100, 100), st.integers(0, 2**16))
def test_pool_commutes_with_scaling(c, seed):
    x = np.random.default_rng(seed).normal(size=(2, 6, 6))
    np.testing.assert_allclose(avg_pool2d(c * x, 3), c * avg_pool2d(x, 3), rtol=1e-12, atol=1e-12)
