"""Layer forward/backward contracts, checked against finite differences."""

import numpy as np
import pytest

from partworth.errors import ProtocolError, ShapeError
from partworth.nn import (
    BatchNorm,
    Dense,
    Network,
    ReLU,
    Sigmoid,
    grad_check,
    network_from_specs,
    stable_sigmoid,
)
from partworth.nn.layers import LayerSpec


class TestForwardBasics:
    def test_dense_identity(self):
        layer = Dense(2, 2, name="d", init="zeros")
        layer.w.value = np.eye(2)
        out = layer.forward(np.array([[1.0, 2.0]]))
        np.testing.assert_array_equal(out, [[1.0, 2.0]])

    def test_relu_definition(self):
        out = ReLU(3).forward(np.array([[-1.0, 0.0, 3.5]]))
        np.testing.assert_array_equal(out, [[0.0, 0.0, 3.5]])

    def test_sigmoid_at_zero(self):
        out = Sigmoid(1).forward(np.array([[0.0]]))
        np.testing.assert_array_equal(out, [[0.5]])

    def test_sigmoid_exact_complement(self):
        x = np.linspace(-30, 30, 1001)
        np.testing.assert_array_equal(stable_sigmoid(x) + stable_sigmoid(-x), np.ones_like(x))

    def test_shape_error_names_layer_index(self, rng):
        net = Network([Dense(3, 4, rng=rng), ReLU(4), Dense(4, 2, rng=rng)])
        with pytest.raises(ShapeError, match="layer 0"):
            net.forward(np.zeros((2, 5)))

    def test_mismatched_stack_rejected(self, rng):
        with pytest.raises(ShapeError):
            Network([Dense(3, 4, rng=rng), ReLU(5)])


class TestBackwardContracts:
    def test_backward_without_forward_is_protocol_error(self, rng):
        layer = Dense(2, 2, rng=rng)
        with pytest.raises(ProtocolError):
            layer.backward(np.ones((1, 2)))

    def test_infer_forward_leaves_no_cache(self, rng):
        layer = Dense(2, 2, rng=rng)
        layer.forward(np.ones((1, 2)), train=False)
        with pytest.raises(ProtocolError):
            layer.backward(np.ones((1, 2)))

    def test_zero_upstream_gives_zero_grads(self, rng):
        net = Network([Dense(3, 4, rng=rng), ReLU(4), Dense(4, 2, rng=rng)])
        net.forward(rng.standard_normal((5, 3)), train=True)
        net.backward(np.zeros((5, 2)))
        for p in net.params():
            np.testing.assert_array_equal(p.grad, np.zeros_like(p.grad))

    def test_dense_weight_grad_is_xT_times_ones(self, rng):
        layer = Dense(3, 2, rng=rng)
        x = rng.standard_normal((4, 3))
        layer.forward(x, train=True)
        layer.backward(np.ones((4, 2)))
        np.testing.assert_allclose(layer.w.grad, x.T @ np.ones((4, 2)), atol=1e-12)

    def test_gradients_accumulate_across_backward_calls(self, rng):
        layer = Dense(2, 2, rng=rng)
        x = rng.standard_normal((3, 2))
        layer.forward(x, train=True)
        layer.backward(np.ones((3, 2)))
        once = layer.w.grad.copy()
        layer.forward(x, train=True)
        layer.backward(np.ones((3, 2)))
        np.testing.assert_allclose(layer.w.grad, 2.0 * once, atol=1e-12)


def _sum_loss(model, batch):
    """Loss = sum of outputs; upstream gradient of ones."""
    out = model.forward(batch, train=True)
    model.backward(np.ones_like(out))
    return float(out.sum())


def _l2_loss(model, batch):
    out = model.forward(batch, train=True)
    model.backward(2.0 * out / out.size)
    return float((out * out).mean())


class TestGradCheck:
    def test_single_dense_sum_loss(self, rng):
        net = Network([Dense(4, 3, rng=rng)])
        err = grad_check(net, _sum_loss, rng.standard_normal((5, 4)))
        assert err < 1e-6

    def test_linear_model_l2_loss(self, rng):
        net = Network([Dense(6, 1, rng=rng)])
        err = grad_check(net, _l2_loss, rng.standard_normal((8, 6)))
        assert err < 1e-6

    def test_two_layer_relu_net(self, rng):
        net = Network([Dense(5, 8, rng=rng), ReLU(8), Dense(8, 2, rng=rng)])
        err = grad_check(net, _l2_loss, rng.standard_normal((6, 5)) + 0.05)
        assert err < 1e-4

    def test_sigmoid_layer(self, rng):
        net = Network([Dense(4, 4, rng=rng), Sigmoid(4)])
        err = grad_check(net, _l2_loss, rng.standard_normal((5, 4)))
        assert err < 1e-4

    def test_batchnorm_train_mode(self, rng):
        net = Network([Dense(4, 6, rng=rng), BatchNorm(6), ReLU(6), Dense(6, 2, rng=rng)])
        err = grad_check(net, _l2_loss, rng.standard_normal((7, 4)))
        assert err < 1e-3

    def test_random_shapes_all_layer_kinds(self):
        rng = np.random.default_rng(7)
        for trial in range(5):
            d_in = int(rng.integers(2, 12))
            d_hid = int(rng.integers(2, 12))
            net = Network([
                Dense(d_in, d_hid, rng=rng),
                BatchNorm(d_hid),
                ReLU(d_hid),
                Dense(d_hid, 3, rng=rng),
                Sigmoid(3),
            ])
            batch = rng.standard_normal((int(rng.integers(2, 9)), d_in))
            assert grad_check(net, _l2_loss, batch) < 1e-3


class TestBatchNormModes:
    def test_infer_uses_running_stats_and_accepts_batch_of_one(self, rng):
        bn = BatchNorm(3)
        for _ in range(20):
            bn.forward(rng.standard_normal((16, 3)) * 2.0 + 1.0, train=True)
        one = bn.forward(np.array([[1.0, 1.0, 1.0]]), train=False)
        assert one.shape == (1, 3)
        again = bn.forward(np.array([[1.0, 1.0, 1.0]]), train=False)
        np.testing.assert_array_equal(one, again)

    def test_train_mode_normalises_batch(self, rng):
        bn = BatchNorm(4)
        out = bn.forward(rng.standard_normal((200, 4)) * 3.0 + 5.0, train=True)
        np.testing.assert_allclose(out.mean(axis=0), 0.0, atol=1e-10)
        np.testing.assert_allclose(out.std(axis=0), 1.0, atol=1e-2)

    def test_infer_is_deterministic_and_side_effect_free(self, rng):
        net = Network([Dense(3, 5, rng=rng), BatchNorm(5), ReLU(5), Dense(5, 2, rng=rng),
                       Sigmoid(2)])
        net.forward(rng.standard_normal((10, 3)), train=True)
        x = rng.standard_normal((4, 3))
        first = net.forward(x, train=False)
        second = net.forward(x, train=False)
        np.testing.assert_array_equal(first, second)


class TestSerialisation:
    def test_state_dict_roundtrip(self, rng):
        net = Network([Dense(3, 4, rng=rng), BatchNorm(4), ReLU(4), Dense(4, 1, rng=rng)])
        net.forward(rng.standard_normal((6, 3)), train=True)  # move running stats
        state = net.state_dict()
        clone = network_from_specs(net.specs(), rng=None)
        clone.load_state_dict(state)
        x = rng.standard_normal((5, 3))
        np.testing.assert_array_equal(net.forward(x), clone.forward(x))

    def test_spec_rejects_bad_kind(self):
        with pytest.raises(ShapeError):
            LayerSpec("conv", 3, 3)
