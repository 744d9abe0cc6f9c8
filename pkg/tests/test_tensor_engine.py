import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from percept.errors import (
    InvalidTarget,
    NonFiniteValue,
    ShapeMismatch,
    UnknownLayerName,
)
from percept.layers import Conv2d, Dense, Flatten, MaxPool2d, ReLU, Softmax
from percept.network import Network, Tape, backward, forward, gradient_check
from percept.tensor import Tensor

from conftest import seeded_input


def linear_net(weight, bias=None):
    weight = np.asarray(weight, dtype=np.float32)
    k, d = weight.shape
    bias = np.zeros(k, dtype=np.float32) if bias is None else bias
    return Network(
        [Flatten("flat"), Dense("fc", weight, bias), Softmax("softmax")],
        input_shape=(1, 1, d), class_count=k)


class TestTensor:
    def test_shape_data_flat_row_major(self):
        t = Tensor(np.arange(6, dtype=np.float32).reshape(2, 3))
        assert t.shape == (2, 3)
        assert t.data.tolist() == [0, 1, 2, 3, 4, 5]

    def test_rejects_nan_and_inf(self):
        with pytest.raises(NonFiniteValue):
            Tensor([np.nan, 1.0])
        with pytest.raises(NonFiniteValue):
            Tensor([np.inf, 1.0])


class TestForward:
    def test_identity_conv_passes_input_through(self):
        kernel = np.zeros((1, 1, 1, 1), dtype=np.float32)
        kernel[0, 0, 0, 0] = 1.0
        net = Network(
            [Conv2d("ident", kernel, np.zeros(1, dtype=np.float32)),
             Flatten("flat"),
             Dense("fc", np.eye(4, dtype=np.float32),
                   np.zeros(4, dtype=np.float32))],
            input_shape=(1, 2, 2), class_count=4)
        x = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32)[None]
        _, _, tape = forward(net, x, record={"ident"})
        assert np.array_equal(tape.activations["ident"].array, x)

    def test_zero_input_yields_final_bias(self, reference_net):
        zero = np.zeros((1, 16, 16), dtype=np.float32)
        logits, _, _ = forward(reference_net, zero)
        fc2 = reference_net.layers[reference_net.layer_index("fc2")]
        # weight paths die on zero input except via earlier biases; check
        # against an explicit evaluation instead: relu kills negative biases
        # only, so compare with the engine's own zero-input pass on a
        # bias-free clone of everything before fc2
        # Simplest faithful check: logits equal fc2(applied to the zero
        # input's fc1 activations), i.e. forward is consistent at the tap.
        _, _, tape = forward(reference_net, zero, record={"relu3"})
        manual = fc2.weight @ tape.activations["relu3"].array + fc2.bias
        assert np.allclose(logits.array, manual, atol=0)

    def test_zero_input_bias_only_network(self):
        # all conv/dense biases zero except the head: logits == head bias
        conv = Conv2d("conv1", np.full((2, 1, 3, 3), 0.25, dtype=np.float32),
                      np.zeros(2, dtype=np.float32), padding=1)
        dense = Dense("fc", np.full((3, 2 * 4 * 4), 0.5, dtype=np.float32),
                      np.array([0.3, -0.2, 0.1], dtype=np.float32))
        net = Network([conv, ReLU("relu1"), Flatten("flat"), dense,
                       Softmax("softmax")],
                      input_shape=(1, 4, 4), class_count=3)
        logits, _, _ = forward(net, np.zeros((1, 4, 4), dtype=np.float32))
        assert np.array_equal(logits.array,
                              np.array([0.3, -0.2, 0.1], dtype=np.float32))

    def test_golden_logits_on_digit_fixture(self, reference_net, digit_image,
                                            golden_dir):
        golden = json.loads((golden_dir / "forward_digit0.json").read_text())
        logits, _, _ = forward(reference_net, digit_image)
        expected = np.array(golden["logits"])
        rel = np.abs(logits.array - expected) / np.maximum(np.abs(expected), 1e-6)
        assert rel.max() < 1e-4

    def test_probs_are_softmax_of_logits(self, reference_net, digit_image):
        logits, probs, _ = forward(reference_net, digit_image)
        e = np.exp(logits.array - logits.array.max())
        assert np.allclose(probs.array, e / e.sum(), atol=1e-6)
        assert abs(probs.array.sum() - 1.0) < 1e-6
        assert np.all(probs.array > 0) and np.all(probs.array < 1)

    def test_forward_determinism_bitwise(self, reference_net, digit_image):
        a = forward(reference_net, digit_image)[0].array
        b = forward(reference_net, digit_image)[0].array
        assert np.array_equal(a, b)

    def test_shape_mismatch(self, reference_net):
        with pytest.raises(ShapeMismatch):
            forward(reference_net, np.zeros((1, 8, 8), dtype=np.float32))

    def test_unknown_record_name_lists_layers(self, reference_net, digit_image):
        with pytest.raises(UnknownLayerName) as err:
            forward(reference_net, digit_image, record={"features_29"})
        assert "conv1" in str(err.value)

    def test_nan_guard_raises(self):
        big = Dense("fc", np.full((2, 4), 1e30, dtype=np.float32),
                    np.zeros(2, dtype=np.float32))
        net = Network([Flatten("flat"), big], input_shape=(1, 1, 4),
                      class_count=2)
        with pytest.raises(NonFiniteValue):
            forward(net, np.full((1, 1, 4), 1e15, dtype=np.float32))


class TestBackward:
    def test_dense_gradient_is_weight_row(self):
        w = np.array([[1.0, -2.0, 3.0], [0.5, 0.5, 0.5]], dtype=np.float32)
        net = linear_net(w)
        x = np.array([[[0.3, -0.7, 0.1]]], dtype=np.float32)
        for target in (0, 1):
            g = backward(net, x, target)
            assert np.array_equal(g.array.reshape(-1), w[target])

    def test_guided_zero_when_relu_inputs_negative(self):
        w1 = -np.eye(4, dtype=np.float32)  # forces negative pre-activations
        net = Network(
            [Flatten("flat"), Dense("fc1", w1, np.zeros(4, dtype=np.float32)),
             ReLU("relu"), Dense("fc2", np.ones((2, 4), dtype=np.float32),
                                 np.zeros(2, dtype=np.float32)),
             Softmax("softmax")],
            input_shape=(1, 1, 4), class_count=2)
        x = np.full((1, 1, 4), 0.5, dtype=np.float32)
        g = backward(net, x, 0, rule="guided")
        assert np.all(g.array == 0.0)

    def test_gradient_matches_finite_differences(self, reference_net):
        for target in range(4):
            err = gradient_check(reference_net, seeded_input(3), target, 1e-3)
            assert err <= 1e-3

    def test_prob_source_differentiates_through_softmax(self, reference_net):
        x = seeded_input(5)
        g_logit = backward(reference_net, x, 1, source="logit").array
        g_prob = backward(reference_net, x, 1, source="prob").array
        _, probs, _ = forward(reference_net, x)
        # d p1/d logits = p1*(e1 - p); the input gradients relate through it
        assert not np.allclose(g_logit, g_prob)
        # numeric check of the prob gradient on a few coordinates
        x64 = x.astype(np.float64).reshape(-1)
        eps = 1e-4
        rng = np.random.default_rng(0)
        for i in rng.choice(x64.size, 12, replace=False):
            xp = x64.copy(); xp[i] += eps
            xm = x64.copy(); xm[i] -= eps
            pp = forward(reference_net, xp.reshape(1, 16, 16).astype(np.float32))[1].array[1]
            pm = forward(reference_net, xm.reshape(1, 16, 16).astype(np.float32))[1].array[1]
            numeric = (pp - pm) / (2 * eps)
            assert abs(numeric - g_prob.reshape(-1)[i]) <= 2e-3 * max(
                1.0, abs(numeric))

    def test_invalid_target(self, reference_net, digit_image):
        with pytest.raises(InvalidTarget):
            backward(reference_net, digit_image, 4)

    def test_unknown_layer(self, reference_net, digit_image):
        with pytest.raises(UnknownLayerName):
            backward(reference_net, digit_image, 0, to="nope")

    def test_tape_gradient_shapes_match_activations(self, reference_net,
                                                    digit_image):
        record = {"conv1", "relu2", "pool2", "fc1"}
        _, _, tape = forward(reference_net, digit_image, record=record)
        backward(reference_net, digit_image, 0, tape=tape)
        for name in record:
            assert tape.gradients[name].shape == tape.activations[name].shape

    def test_guided_rule_masks_on_input_and_incoming_gradient(self,
                                                              reference_net):
        # at each ReLU: gradient passed to the layer below is nonzero only
        # where the forward input and the incoming gradient are both positive
        for seed in range(3):
            x = seeded_input(seed)
            record = {"conv1", "relu1", "conv2", "relu2"}
            _, _, tape = forward(reference_net, x, record=record)
            backward(reference_net, x, 0, tape=tape, rule="guided")
            for conv, relu in (("conv1", "relu1"), ("conv2", "relu2")):
                passed = tape.gradients[conv].array
                incoming = tape.gradients[relu].array
                fwd_in = tape.activations[conv].array
                nonzero = passed != 0
                assert np.all(fwd_in[nonzero] > 0)
                assert np.all(incoming[nonzero] > 0)


class TestGradientCheck:
    def test_linear_model_is_exact(self):
        net = linear_net(np.array([[1.0, -2.0, 3.0], [0.5, 0.5, 0.5]],
                                  dtype=np.float32))
        x = np.array([[[0.2, 0.4, 0.6]]], dtype=np.float32)
        assert gradient_check(net, x, 0, 1e-3) <= 1e-6

    def test_kink_probe_returns_finite_after_nudge(self):
        relu_net = Network(
            [Flatten("flat"),
             Dense("fc1", np.eye(3, dtype=np.float32),
                   np.zeros(3, dtype=np.float32)),
             ReLU("relu"),
             Dense("fc2", np.ones((2, 3), dtype=np.float32),
                   np.zeros(2, dtype=np.float32)),
             Softmax("softmax")],
            input_shape=(1, 1, 3), class_count=2)
        at_kink = np.zeros((1, 1, 3), dtype=np.float32)
        err = gradient_check(relu_net, at_kink, 0, 1e-3)
        assert np.isfinite(err)  # degenerate but defined
        nudged = at_kink + 1e-2
        assert gradient_check(relu_net, nudged, 0, 1e-3) <= 1e-3

    def test_epsilon_must_be_positive(self, reference_net, digit_image):
        with pytest.raises(InvalidTarget):
            gradient_check(reference_net, digit_image, 0, 0.0)


class TestNetworkValidation:
    def test_duplicate_names_rejected(self):
        with pytest.raises(ShapeMismatch):
            Network([Flatten("a"), Flatten("a"),
                     Dense("fc", np.eye(2, dtype=np.float32),
                           np.zeros(2, dtype=np.float32))],
                    input_shape=(1, 1, 2), class_count=2)

    def test_output_shape_must_match_class_count(self):
        with pytest.raises(ShapeMismatch):
            Network([Flatten("f"),
                     Dense("fc", np.eye(3, dtype=np.float32),
                           np.zeros(3, dtype=np.float32))],
                    input_shape=(1, 1, 3), class_count=2)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(min_value=-8, max_value=8), min_size=2,
                max_size=8))
def test_softmax_distribution_property(logits):
    # logit spreads beyond ~16 saturate float32 to exactly 1.0, so the open
    # interval is only meaningful over the engine's operating range
    out = Softmax("s").forward(np.array(logits, dtype=np.float32))
    assert abs(float(out.sum()) - 1.0) < 1e-6
    assert np.all(out > 0) and np.all(out < 1)
