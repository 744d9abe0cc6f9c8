import hashlib
import json

import numpy as np
import pytest

from percept.errors import ShapeMismatch
from percept.gradient import (
    guided_bp,
    integrated_gradients,
    smooth_grad,
    vanilla_bp,
)
from percept.layers import Dense, Flatten, Softmax
from percept.network import Network, backward, forward

from conftest import seeded_input


def linear_net(weight):
    weight = np.asarray(weight, dtype=np.float32)
    k, d = weight.shape
    return Network(
        [Flatten("flat"), Dense("fc", weight, np.zeros(k, dtype=np.float32)),
         Softmax("softmax")],
        input_shape=(1, 1, d), class_count=k)


class TestVanilla:
    def test_linear_model_map_is_abs_weight_row(self):
        w = np.array([[0.5, -1.5, 2.0, 0.0], [1.0, 1.0, 1.0, 1.0]],
                     dtype=np.float32)
        net = linear_net(w)
        x = np.zeros((1, 1, 4), dtype=np.float32)
        m = vanilla_bp(net, x, 0)
        assert np.array_equal(m.values, np.abs(w[0]).reshape(1, 4))

    def test_equals_backward_collapse_exactly(self, reference_net):
        x = seeded_input(1)
        m = vanilla_bp(reference_net, x, 2)
        raw = backward(reference_net, x, 2, to="input").array
        assert np.array_equal(m.values, np.abs(raw).max(axis=0))

    def test_golden_checksum_stable(self, reference_net, digit_image,
                                    golden_dir):
        golden = json.loads((golden_dir / "vanilla_digit0.json").read_text())
        m = vanilla_bp(reference_net, digit_image, golden["class"])
        assert hashlib.sha256(m.values.tobytes()).hexdigest() == golden["sha256"]
        assert float(m.values.sum()) == pytest.approx(golden["sum"], rel=1e-6)


class TestGuided:
    def test_no_relu_net_equals_vanilla(self):
        net = linear_net(np.array([[1.0, -2.0], [0.5, 0.5]], dtype=np.float32))
        x = np.array([[[0.3, 0.9]]], dtype=np.float32)
        assert np.array_equal(vanilla_bp(net, x, 0).values,
                              guided_bp(net, x, 0).values)

    def test_all_negative_pre_relu_gives_zero_map(self, planted_net):
        # zero input: the planted corner detector is exactly zero, so the
        # class-0 gradient dies at relu2 under both rules
        x = np.zeros((1, 16, 16), dtype=np.float32)
        assert np.all(guided_bp(planted_net, x, 0).values == 0.0)

    def test_support_contained_in_vanilla(self, reference_net):
        for seed in range(5):
            x = seeded_input(seed)
            g = guided_bp(reference_net, x, 1).values
            v = vanilla_bp(reference_net, x, 1).values
            assert np.count_nonzero(g) <= np.count_nonzero(v)
            assert np.all((g != 0) <= (v != 0))


class TestSmoothGrad:
    def test_n1_sigma0_bitwise_equals_vanilla(self, reference_net):
        x = seeded_input(2)
        t_van, t_sg = {}, {}
        vanilla_bp(reference_net, x, 0, trace=t_van)
        m = smooth_grad(reference_net, x, 0, n=1, sigma=0.0, seed=9,
                        trace=t_sg)
        assert np.array_equal(t_van["raw_gradient"], t_sg["raw_gradient"])
        assert np.array_equal(m.values,
                              vanilla_bp(reference_net, x, 0).values)

    def test_sigma0_any_n_close_to_vanilla(self, reference_net):
        x = seeded_input(2)
        m = smooth_grad(reference_net, x, 0, n=7, sigma=0.0, seed=0)
        v = vanilla_bp(reference_net, x, 0)
        assert np.allclose(m.values, v.values, atol=1e-6)

    def test_seeded_reproducibility(self, reference_net):
        x = seeded_input(4)
        a = smooth_grad(reference_net, x, 1, n=20, sigma=0.1, seed=42)
        b = smooth_grad(reference_net, x, 1, n=20, sigma=0.1, seed=42)
        assert np.array_equal(a.values, b.values)
        c = smooth_grad(reference_net, x, 1, n=20, sigma=0.1, seed=43)
        assert not np.array_equal(a.values, c.values)

    def test_linear_model_expectation_within_3_standard_errors(self):
        w = np.array([[0.8, -0.6, 0.2], [0.0, 0.0, 0.0]], dtype=np.float32)
        net = linear_net(w)
        x = np.array([[[0.1, 0.5, 0.9]]], dtype=np.float32)
        n = 500
        m = smooth_grad(net, x, 0, n=n, sigma=0.3, seed=7)
        # the gradient of a linear logit is constant, so the noise average
        # equals the weight row exactly up to float accumulation error
        assert np.allclose(m.values, np.abs(w[0]).reshape(1, 3), atol=1e-5)

    def test_rejects_bad_params(self, reference_net):
        x = seeded_input(0)
        with pytest.raises(ShapeMismatch):
            smooth_grad(reference_net, x, 0, n=0)
        with pytest.raises(ShapeMismatch):
            smooth_grad(reference_net, x, 0, n=5, sigma=-0.1)


class TestIntegratedGradients:
    def test_input_equals_baseline_gives_zero(self, reference_net):
        x = seeded_input(3)
        tr = {}
        m = integrated_gradients(reference_net, x, 0, baseline=x, steps=8,
                                 trace=tr)
        assert np.all(m.values == 0.0)
        assert np.all(tr["raw_attribution"] == 0.0)

    def test_linear_model_exact_for_any_steps(self):
        w = np.array([[1.5, -0.5], [0.0, 1.0]], dtype=np.float32)
        net = linear_net(w)
        x = np.array([[[0.8, 0.2]]], dtype=np.float32)
        baseline = np.array([[[0.1, 0.6]]], dtype=np.float32)
        for steps in (1, 3, 16):
            tr = {}
            integrated_gradients(net, x, 0, baseline=baseline, steps=steps,
                                 trace=tr)
            expected = (x - baseline)[0] * w[0].reshape(1, 2)
            assert np.allclose(tr["raw_attribution"][0], expected, atol=1e-6)

    def test_completeness_on_reference_cnn(self, reference_net):
        for seed in range(5):
            x = seeded_input(seed)
            baseline = np.zeros_like(x)
            tr = {}
            integrated_gradients(reference_net, x, 1, baseline=baseline,
                                 steps=256, trace=tr)
            fx = forward(reference_net, x)[0].array[1]
            f0 = forward(reference_net, baseline)[0].array[1]
            gap = abs(float(tr["raw_attribution"].sum()) - float(fx - f0))
            assert gap <= 0.01 * abs(float(fx - f0)) + 1e-4

    def test_shape_mismatch(self, reference_net):
        with pytest.raises(ShapeMismatch):
            integrated_gradients(reference_net, seeded_input(0), 0,
                                 baseline=np.zeros((1, 4, 4), dtype=np.float32))

    def test_partial_sums_on_trace(self, reference_net):
        tr = {}
        integrated_gradients(reference_net, seeded_input(1), 0, steps=16,
                             trace=tr)
        assert len(tr["partial_sums"]) == 16
        assert all(np.isfinite(v) for v in tr["partial_sums"])
