import numpy as np
import pytest

from partworth.nn import Adam, Parameter, SGD


def param(value, grad, trainable=True, lr_scale=1.0):
    p = Parameter(np.array(value, dtype=float), "p", trainable=trainable, lr_scale=lr_scale)
    p.grad[...] = np.array(grad, dtype=float)
    return p


class TestSgd:
    def test_basic_step(self):
        p = param([[1.0]], [[1.0]])
        SGD([p], lr=0.1).step()
        assert p.value[0, 0] == pytest.approx(0.9)

    def test_zero_grad_leaves_value(self):
        p = param([[2.5]], [[0.0]])
        SGD([p], lr=0.1).step()
        assert p.value[0, 0] == 2.5

    def test_grads_zeroed_after_step(self):
        p = param([[1.0]], [[3.0]])
        SGD([p], lr=0.1).step()
        np.testing.assert_array_equal(p.grad, [[0.0]])

    def test_frozen_parameter_untouched(self):
        p = param([[1.0]], [[5.0]], trainable=False)
        SGD([p], lr=0.1).step()
        assert p.value[0, 0] == 1.0
        np.testing.assert_array_equal(p.grad, [[0.0]])  # still zeroed


class TestAdam:
    @pytest.mark.parametrize("g", [1e-4, 0.1, 1.0, 250.0])
    def test_first_step_magnitude_is_lr(self, g):
        # bias-corrected first step: |delta| = lr * |g| / (|g| + eps) ~ lr
        p = param([[0.0]], [[g]])
        Adam([p], lr=1e-3).step()
        assert abs(p.value[0, 0]) == pytest.approx(1e-3, rel=1e-3)
        assert np.sign(p.value[0, 0]) == -np.sign(g)

    def test_zero_grad_no_update(self):
        p = param([[1.0]], [[0.0]])
        Adam([p], lr=1e-3).step()
        assert p.value[0, 0] == 1.0

    def test_lr_scale_shrinks_update(self):
        a = param([[0.0]], [[1.0]], lr_scale=1.0)
        b = param([[0.0]], [[1.0]], lr_scale=0.1)
        opt = Adam([a, b], lr=1e-3)
        opt.step()
        assert abs(b.value[0, 0]) == pytest.approx(0.1 * abs(a.value[0, 0]), rel=1e-9)

    def test_frozen_parameter_untouched(self):
        p = param([[1.0]], [[1.0]], trainable=False)
        Adam([p], lr=1e-3).step()
        assert p.value[0, 0] == 1.0

    def test_moment_shapes_match(self):
        p = Parameter(np.zeros((3, 4)), "w")
        opt = Adam([p])
        assert opt._m[0].shape == (3, 4)
        assert opt._v[0].shape == (3, 4)

    def test_converges_on_quadratic(self):
        # minimise (w - 3)^2 by feeding its gradient
        p = param([[0.0]], [[0.0]])
        opt = Adam([p], lr=0.1)
        for _ in range(500):
            p.grad[...] = 2.0 * (p.value - 3.0)
            opt.step()
        assert p.value[0, 0] == pytest.approx(3.0, abs=1e-3)
