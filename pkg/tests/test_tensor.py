import math
import threading

import numpy as np
import pytest

from src.core.exceptions import ConfigurationError, DimensionError, UsageError
from src.tensor import ComputationTape, Tensor, current_tape, grad_check, ops


def gradient_of(build, *leaves):
    for leaf in leaves:
        leaf.requires_grad = True
        leaf.grad = None
    with ComputationTape() as tape:
        loss = build()
    tape.backward(loss)
    return [leaf.grad for leaf in leaves]


class TestMatmul:
    def test_identity(self, rng):
        x = Tensor(rng.standard_normal((2, 3)))
        out = ops.matmul(Tensor(np.eye(2)), x)
        np.testing.assert_array_equal(out.data, x.data)

    def test_hand_product(self):
        out = ops.matmul(Tensor([[1.0, 2.0], [3.0, 4.0]]), Tensor([[1.0], [1.0]]))
        np.testing.assert_array_equal(out.data, [[3.0], [7.0]])

    def test_gradient_against_ones(self, rng):
        a = Tensor(rng.standard_normal((3, 4)))
        b = Tensor(np.ones((4, 1)))
        (grad,) = gradient_of(lambda: ops.sum(ops.matmul(a, b)), a)
        np.testing.assert_array_equal(grad, np.ones((3, 4)))
        assert grad_check(lambda: ops.sum(ops.matmul(a, b)), a) < 1e-8

    def test_inner_extent_mismatch(self):
        with pytest.raises(DimensionError):
            ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))


class TestSoftmax:
    def test_zero_row_is_uniform(self):
        out = ops.softmax_rows(Tensor(np.zeros((1, 4))))
        np.testing.assert_array_equal(out.data, [[0.25, 0.25, 0.25, 0.25]])

    def test_hand_values(self):
        out = ops.softmax_rows(Tensor([[math.log(1.0), math.log(3.0)]]))
        np.testing.assert_allclose(out.data, [[0.25, 0.75]], atol=1e-14)

    def test_shift_invariance(self, rng):
        x = rng.standard_normal((3, 5))
        a = ops.softmax_rows(Tensor(x)).data
        b = ops.softmax_rows(Tensor(x + 7.0)).data
        np.testing.assert_allclose(a, b, atol=1e-14)

    def test_rows_sum_to_one_with_masked_keys(self, rng):
        mask = np.array([True, False, True, True])
        out = ops.softmax_rows(Tensor(rng.standard_normal((3, 4)) * 50), mask).data
        np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(out[:, 1] == 0.0)


class TestLayerNorm:
    def test_constant_row_maps_to_zero(self):
        out = ops.layer_norm(Tensor(np.full((1, 4), 3.5)), Tensor(np.ones(4)),
                             Tensor(np.zeros(4)), 1e-5)
        np.testing.assert_array_equal(out.data, np.zeros((1, 4)))

    def test_two_values(self):
        out = ops.layer_norm(Tensor([[1.0, 3.0]]), Tensor(np.ones(2)), Tensor(np.zeros(2)),
                             1e-12)
        np.testing.assert_allclose(out.data, [[-1.0, 1.0]], atol=1e-9)

    def test_zero_gain_gives_bias(self, rng):
        bias = rng.standard_normal(5)
        out = ops.layer_norm(Tensor(rng.standard_normal((3, 5))), Tensor(np.zeros(5)),
                             Tensor(bias), 1e-5)
        np.testing.assert_array_equal(out.data, np.tile(bias, (3, 1)))

    def test_non_positive_eps(self):
        with pytest.raises(ConfigurationError):
            ops.layer_norm(Tensor(np.ones((1, 2))), Tensor(np.ones(2)), Tensor(np.zeros(2)), 0.0)

    def test_gradient(self, rng):
        x = Tensor(rng.standard_normal((3, 6)))
        gain = Tensor(rng.standard_normal(6))
        bias = Tensor(rng.standard_normal(6))
        weights = rng.standard_normal((3, 6))

        def f():
            return ops.sum(ops.mul(ops.layer_norm(x, gain, bias, 1e-5), weights))

        assert grad_check(f, x) < 1e-6
        assert grad_check(f, gain) < 1e-6


class TestConv1d:
    def test_identity_kernel(self, rng):
        x = Tensor(rng.standard_normal((6, 3)))
        out = ops.conv1d(x, Tensor(np.eye(3)[None, :, :]))
        np.testing.assert_array_equal(out.data, x.data)

    def test_stride_picks_every_other_frame(self):
        x = Tensor(np.array([[1.0], [2.0], [3.0], [4.0]]))
        out = ops.conv1d(x, Tensor(np.ones((1, 1, 1))), stride=2)
        np.testing.assert_array_equal(out.data, [[1.0], [3.0]])

    def test_zero_kernel(self, rng):
        out = ops.conv1d(Tensor(rng.standard_normal((5, 2))), Tensor(np.zeros((3, 2, 4))))
        np.testing.assert_array_equal(out.data, np.zeros((5, 4)))

    def test_same_padding_length(self, rng):
        out = ops.conv1d(Tensor(rng.standard_normal((7, 2))), Tensor(np.ones((3, 2, 1))),
                         stride=2)
        assert out.shape == (4, 1)

    def test_even_kernel_rejected(self, rng):
        with pytest.raises(ConfigurationError):
            ops.conv1d(Tensor(np.ones((4, 1))), Tensor(np.ones((2, 1, 1))))

    def test_gradients(self, rng):
        x = Tensor(rng.standard_normal((7, 3)))
        kernel = Tensor(rng.standard_normal((3, 3, 2)))
        depthwise = Tensor(rng.standard_normal((3, 3)))
        weights = rng.standard_normal((4, 2))

        def f():
            strided = ops.depthwise_conv1d(x, depthwise, stride=2)
            return ops.sum(ops.mul(ops.conv1d(strided, kernel), weights))

        for leaf in (x, kernel, depthwise):
            assert grad_check(f, leaf) < 1e-6


class TestBackward:
    def test_sum_gives_ones(self, rng):
        x = Tensor(rng.standard_normal(5))
        (grad,) = gradient_of(lambda: ops.sum(x), x)
        np.testing.assert_array_equal(grad, np.ones(5))

    def test_square_sum(self):
        x = Tensor([1.0, -2.0])
        (grad,) = gradient_of(lambda: ops.sum(ops.mul(x, x)), x)
        np.testing.assert_array_equal(grad, [2.0, -4.0])

    def test_fan_out_accumulates(self, rng):
        x = Tensor(rng.standard_normal(4))
        (grad,) = gradient_of(lambda: ops.add(ops.sum(x), ops.sum(ops.mul(x, 3.0))), x)
        np.testing.assert_allclose(grad, np.full(4, 4.0))

    def test_non_scalar_loss(self):
        x = Tensor(np.ones(3), requires_grad=True)
        with ComputationTape() as tape:
            y = ops.mul(x, 2.0)
        with pytest.raises(UsageError):
            tape.backward(y)

    def test_nothing_recorded_without_tape(self):
        x = Tensor(np.ones(3), requires_grad=True)
        y = ops.mul(x, 2.0)
        assert not y.requires_grad
        assert current_tape() is None

    def test_nested_tapes_restore(self):
        with ComputationTape() as outer:
            with ComputationTape() as inner:
                assert current_tape() is inner
            assert current_tape() is outer
        assert current_tape() is None

    def test_threads_record_separately(self, rng):
        results = {}

        def work(key, scale):
            x = Tensor(np.ones(3))
            (grad,) = gradient_of(lambda: ops.sum(ops.mul(x, scale)), x)
            results[key] = grad

        threads = [threading.Thread(target=work, args=(k, float(k + 1))) for k in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        for k in range(4):
            np.testing.assert_array_equal(results[k], np.full(3, k + 1.0))


class TestGradCheck:
    def test_linear_is_exact(self, rng):
        x = Tensor(rng.standard_normal((3, 3)))
        assert grad_check(lambda: ops.sum(x), x) < 1e-10

    def test_attention_output(self, rng):
        x = Tensor(rng.standard_normal((4, 4)))
        w = Tensor(rng.standard_normal((4, 4)))
        v = rng.standard_normal((4, 4))

        def f():
            scores = ops.matmul(ops.matmul(x, w), ops.transpose(x))
            return ops.sum(ops.matmul(ops.softmax_rows(scores), v))

        assert grad_check(f, x, 1e-5) < 1e-6
        assert grad_check(f, w, 1e-5) < 1e-6

    def test_smooth_nonlinearities(self, rng):
        x = Tensor(rng.standard_normal((3, 4)))

        def f():
            y = ops.add(ops.softplus(x), ops.log_sigmoid(x))
            y = ops.add(y, ops.exp(ops.mul(ops.sigmoid(x), 0.5)))
            return ops.sum(ops.normalize_rows(y))

        assert grad_check(f, x) < 1e-6

    @pytest.mark.parametrize('h', [0.0, 0.1, -1e-5])
    def test_step_out_of_range(self, h):
        x = Tensor(np.ones(2))
        with pytest.raises(UsageError):
            grad_check(lambda: ops.sum(x), x, h)


def away_from_zero(rng, shape, margin=0.2):
    return np.sign(rng.standard_normal(shape)) * (margin + np.abs(rng.standard_normal(shape)))


def elementwise(op):
    def build(rng, r, c):
        x = Tensor(rng.standard_normal((r, c)))
        return (lambda: op(x)), [x]
    return build


def binary(op, second=lambda rng, a: rng.standard_normal(a.shape)):
    def build(rng, r, c):
        a = Tensor(rng.standard_normal((r, c)))
        b = Tensor(second(rng, a.data))
        return (lambda: op(a, b)), [a, b]
    return build


def positive_input(op):
    def build(rng, r, c):
        x = Tensor(0.5 + np.abs(rng.standard_normal((r, c))))
        return (lambda: op(x)), [x]
    return build


def build_relu(rng, r, c):
    x = Tensor(away_from_zero(rng, (r, c)))
    return (lambda: ops.relu(x)), [x]


def build_matmul(rng, r, c):
    a = Tensor(rng.standard_normal((r, c)))
    b = Tensor(rng.standard_normal((c, int(rng.integers(1, 5)))))
    return (lambda: ops.matmul(a, b)), [a, b]


def build_softmax(rng, r, c):
    x = Tensor(2.0 * rng.standard_normal((r, c)))
    mask = rng.random(c) < 0.7
    mask[int(rng.integers(0, c))] = True
    return (lambda: ops.softmax_rows(x, mask)), [x]


def build_layer_norm(rng, r, c):
    c = max(c, 3)
    x = Tensor(rng.standard_normal((r, c)))
    gain = Tensor(rng.standard_normal(c))
    bias = Tensor(rng.standard_normal(c))
    return (lambda: ops.layer_norm(x, gain, bias, 1e-5)), [x, gain, bias]


def build_normalize_rows(rng, r, c):
    x = Tensor(away_from_zero(rng, (r, c), margin=0.5))
    return (lambda: ops.normalize_rows(x)), [x]


def build_conv1d(rng, r, c):
    x = Tensor(rng.standard_normal((r + 3, c)))
    kernel = Tensor(rng.standard_normal((int(rng.choice([1, 3, 5])), c,
                                         int(rng.integers(1, 4)))))
    stride = int(rng.integers(1, 3))
    return (lambda: ops.conv1d(x, kernel, stride=stride)), [x, kernel]


def build_depthwise_conv1d(rng, r, c):
    x = Tensor(rng.standard_normal((r + 3, c)))
    kernel = Tensor(rng.standard_normal((int(rng.choice([1, 3, 5])), c)))
    stride = int(rng.integers(1, 3))
    return (lambda: ops.depthwise_conv1d(x, kernel, stride=stride)), [x, kernel]


def build_slice_cols(rng, r, c):
    x = Tensor(rng.standard_normal((r, c + 1)))
    start = int(rng.integers(0, c))
    stop = int(rng.integers(start + 1, c + 2))
    return (lambda: ops.slice_cols(x, start, stop)), [x]


def build_concat_cols(rng, r, c):
    a = Tensor(rng.standard_normal((r, c)))
    b = Tensor(rng.standard_normal((r, int(rng.integers(1, 4)))))
    return (lambda: ops.concat_cols([a, b])), [a, b]


def build_concat_rows(rng, r, c):
    a = Tensor(rng.standard_normal((r, c)))
    b = Tensor(rng.standard_normal((int(rng.integers(1, 4)), c)))
    return (lambda: ops.concat_rows([a, b])), [a, b]


def build_take_rows(rng, r, c):
    x = Tensor(rng.standard_normal((r, c)))
    index = rng.integers(0, r, int(rng.integers(1, 2 * r + 1)))
    return (lambda: ops.take_rows(x, index)), [x]


def build_sum(rng, r, c):
    x = Tensor(rng.standard_normal((r, c)))
    axis = [None, 0, 1][int(rng.integers(0, 3))]
    return (lambda: ops.sum(x, axis)), [x]


RANDOM_SHAPE_OPS = {
    'add': binary(ops.add),
    'sub': binary(ops.sub),
    'mul': binary(ops.mul),
    'div': binary(ops.div, lambda rng, a: away_from_zero(rng, a.shape, margin=0.5)),
    'minimum': binary(ops.minimum, lambda rng, a: a + away_from_zero(rng, a.shape)),
    'maximum': binary(ops.maximum, lambda rng, a: a + away_from_zero(rng, a.shape)),
    'power': positive_input(lambda x: ops.power(x, 1.5)),
    'log': positive_input(ops.log),
    'square': elementwise(ops.square),
    'relu': build_relu,
    'sigmoid': elementwise(ops.sigmoid),
    'softplus': elementwise(ops.softplus),
    'log_sigmoid': elementwise(ops.log_sigmoid),
    'exp': elementwise(lambda x: ops.exp(ops.mul(x, 0.5))),
    'sum': build_sum,
    'mean': elementwise(ops.mean),
    'transpose': elementwise(ops.transpose),
    'reshape': elementwise(lambda x: ops.reshape(x, (-1,))),
    'slice_cols': build_slice_cols,
    'concat_cols': build_concat_cols,
    'concat_rows': build_concat_rows,
    'take_rows': build_take_rows,
    'matmul': build_matmul,
    'softmax_rows': build_softmax,
    'layer_norm': build_layer_norm,
    'normalize_rows': build_normalize_rows,
    'conv1d': build_conv1d,
    'depthwise_conv1d': build_depthwise_conv1d,
}


class TestRandomShapeGradients:
    @pytest.mark.parametrize('name', sorted(RANDOM_SHAPE_OPS))
    def test_twenty_random_shapes(self, name):
        build = RANDOM_SHAPE_OPS[name]
        rng = np.random.default_rng(sorted(RANDOM_SHAPE_OPS).index(name))
        for _ in range(20):
            r, c = (int(n) for n in rng.integers(1, 6, 2))
            out, leaves = build(rng, r, c)
            weights = rng.standard_normal(out().shape)

            def f():
                return ops.sum(ops.mul(out(), weights))

            for leaf in leaves:
                assert grad_check(f, leaf) < 1e-4, (name, r, c)


class TestConvLength:
    @pytest.mark.parametrize('stride', [1, 2])
    @pytest.mark.parametrize('k', [1, 3, 5])
    def test_same_padding_gives_ceil(self, stride, k):
        for T in range(1, 65):
            x = Tensor(np.ones((T, 2)))
            expected = math.ceil(T / stride)
            assert ops.conv1d(x, Tensor(np.ones((k, 2, 3))), stride=stride).shape == \
                (expected, 3)
            assert ops.depthwise_conv1d(x, Tensor(np.ones((k, 2))), stride=stride).shape == \
                (expected, 2)
