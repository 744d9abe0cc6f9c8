import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from percept.errors import ShapeMismatch
from percept.models import (
    NetworkPredictor,
    build_bow_text_classifier,
    build_linear_tabular,
    build_reference_cnn,
    quadrant_test_input,
)
from percept.netio import save_network
from percept.network import forward

from conftest import seeded_input


class TestReferenceCnn:
    def test_same_seed_byte_identical_weight_files(self, tmp_path):
        p1, p2 = tmp_path / "a.pcpt", tmp_path / "b.pcpt"
        save_network(build_reference_cnn(11), p1)
        save_network(build_reference_cnn(11), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_different_seeds_differ(self, tmp_path):
        p1, p2 = tmp_path / "a.pcpt", tmp_path / "b.pcpt"
        save_network(build_reference_cnn(1), p1)
        save_network(build_reference_cnn(2), p2)
        assert p1.read_bytes() != p2.read_bytes()

    def test_planted_class0_ignores_bottom_right_quadrant(self, planted_net):
        for seed in range(5):
            x = quadrant_test_input(seed)
            base = forward(planted_net, x)[0].array[0]
            z_br = x.copy()
            z_br[:, 8:, 8:] = 0.0
            assert abs(forward(planted_net, z_br)[0].array[0] - base) <= 1e-6

    def test_planted_class0_depends_on_top_left_quadrant(self, planted_net):
        for seed in range(5):
            x = quadrant_test_input(seed)
            base = forward(planted_net, x)[0].array[0]
            z_tl = x.copy()
            z_tl[:, :8, :8] = 0.0
            assert abs(forward(planted_net, z_tl)[0].array[0] - base) > 1e-3


class TestLinearTabular:
    def test_zero_weights_give_uniform(self):
        model = build_linear_tabular(np.zeros((2, 3)), np.zeros(2))
        out = model.predict_proba(np.ones((4, 3)))
        assert np.allclose(out, 0.5)

    def test_symmetric_point_is_half(self):
        model = build_linear_tabular(np.array([[1.0], [-1.0]]), np.zeros(2))
        out = model.predict_proba(np.array([[0.0]]))
        assert np.allclose(out, 0.5)

    def test_hand_computed_softmax(self):
        model = build_linear_tabular(np.array([[1.0], [-1.0]]), np.zeros(2))
        out = model.predict_proba(np.array([[1.0]]))
        assert abs(out[0, 0] - 0.8808) < 1e-4
        assert abs(out[0, 1] - 0.1192) < 1e-4

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            build_linear_tabular(np.zeros((2, 3)), np.zeros(3))
        model = build_linear_tabular(np.zeros((2, 3)), np.zeros(2))
        with pytest.raises(ShapeMismatch):
            model.predict_proba(np.ones((4, 5)))


class TestBowText:
    def make(self):
        return build_bow_text_classifier(
            ["good", "bad"], np.array([[2.0, 0.0], [0.0, 2.0]]))

    def test_empty_string_gives_softmax_of_bias(self):
        model = build_bow_text_classifier(
            ["good"], np.array([[2.0], [0.0]]), bias=np.array([0.3, -0.3]))
        out = model.predict_proba([""])
        e = np.exp([0.3, -0.3])
        assert np.allclose(out[0], e / e.sum())

    def test_out_of_vocab_same_as_empty(self):
        model = self.make()
        assert np.allclose(model.predict_proba(["zork quux"]),
                           model.predict_proba([""]))

    def test_repeated_token_counts(self):
        model = self.make()
        out = model.predict_proba(["good good"])
        e = np.exp([4.0, 0.0])
        assert np.allclose(out[0], e / e.sum(), atol=1e-9)

    def test_case_insensitive(self):
        model = self.make()
        assert np.allclose(model.predict_proba(["GOOD Good"]),
                           model.predict_proba(["good good"]))


class TestNetworkPredictor:
    def test_matches_forward_per_row(self, reference_net):
        batch = np.stack([seeded_input(s) for s in range(4)])
        pred = NetworkPredictor(reference_net)
        out = pred.predict_proba(batch)
        for i in range(4):
            expected = forward(reference_net, batch[i])[1].array
            assert np.allclose(out[i], expected, atol=0)

    def test_accepts_flat_rows(self, reference_net):
        batch = np.stack([seeded_input(s) for s in range(3)])
        pred = NetworkPredictor(reference_net)
        assert np.allclose(pred.predict_proba(batch),
                           pred.predict_proba(batch.reshape(3, -1)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(1, 6))
def test_predictor_rows_are_distributions(seed, n):
    rng = np.random.default_rng(seed)
    linear = build_linear_tabular(rng.normal(size=(3, 4)), rng.normal(size=3))
    out = linear.predict_proba(rng.normal(size=(n, 4)))
    assert np.all(out >= 0) and np.all(out <= 1)
    assert np.allclose(out.sum(axis=1), 1.0, atol=1e-6)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_network_predictor_rows_are_distributions(seed):
    net = build_reference_cnn(5)
    rng = np.random.default_rng(seed)
    batch = rng.uniform(0, 1, size=(2, 1, 16, 16)).astype(np.float32)
    out = NetworkPredictor(net).predict_proba(batch)
    assert np.all(out >= 0) and np.all(out <= 1)
    assert np.allclose(out.sum(axis=1), 1.0, atol=1e-6)
