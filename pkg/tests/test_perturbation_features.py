import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from percept.errors import InvalidGrid, ShapeMismatch
from percept.perturbation import (
    ImageInstance,
    TabularInstance,
    TextInstance,
    grid_segment,
    perturb_tabular,
    sample_masks,
)

from conftest import seeded_input


class TestGridSegment:
    def test_1x2_grid_splits_halves(self):
        img = np.zeros((1, 16, 16), dtype=np.float32)
        seg = grid_segment(img, 1, 2)
        assert np.all(seg.labels[:, :8] == 0)
        assert np.all(seg.labels[:, 8:] == 1)

    def test_every_pixel_own_segment(self):
        img = np.zeros((1, 4, 4), dtype=np.float32)
        seg = grid_segment(img, 4, 4)
        assert seg.count == 16
        assert sorted(seg.labels.reshape(-1).tolist()) == list(range(16))

    def test_4x4_grid_on_16x16_equal_cells(self):
        img = np.zeros((1, 16, 16), dtype=np.float32)
        seg = grid_segment(img, 4, 4)
        counts = np.bincount(seg.labels.reshape(-1))
        assert seg.count == 16
        assert np.all(counts == 16)
        assert seg.labels[0, 0] == 0 and seg.labels[0, 15] == 3
        assert seg.labels[15, 15] == 15  # row-major labels

    def test_invalid_grids(self):
        img = np.zeros((1, 8, 8), dtype=np.float32)
        with pytest.raises(InvalidGrid):
            grid_segment(img, 1, 1)
        with pytest.raises(InvalidGrid):
            grid_segment(img, 9, 2)


class TestSampleMasks:
    def test_p_keep_one_gives_all_ones(self):
        assert np.all(sample_masks(6, 20, seed=0, p_keep=1.0) == 1.0)

    def test_fixed_seed_reproducible(self):
        a = sample_masks(8, 50, seed=123)
        b = sample_masks(8, 50, seed=123)
        assert np.array_equal(a, b)

    def test_row0_all_ones(self):
        m = sample_masks(5, 10, seed=4, p_keep=0.2)
        assert np.all(m[0] == 1.0)

    def test_column_means_concentrate(self):
        m = sample_masks(10, 10000, seed=7, p_keep=0.5)
        means = m.mean(axis=0)
        assert np.all(np.abs(means - 0.5) < 0.02)


class TestImageInstance:
    def make(self, seed=0):
        img = seeded_input(seed)
        seg = grid_segment(img, 4, 4)
        return img, ImageInstance(img, seg)

    def test_reconstruct_all_ones_is_identity(self):
        img, inst = self.make()
        out = inst.reconstruct(np.ones(inst.d))
        assert np.array_equal(out, img)

    def test_masked_segments_get_mean_fill(self):
        img, inst = self.make()
        z = np.ones(inst.d)
        z[0] = 0
        out = inst.reconstruct(z)
        top_left = out[:, :4, :4]
        assert np.allclose(top_left, img.mean())
        assert np.array_equal(out[:, :4, 4:], img[:, :4, 4:])

    def test_sample_batch_shapes_and_distance(self):
        _, inst = self.make()
        pert = inst.sample(32, seed=5)
        assert pert.design.shape == (32, 16)
        assert pert.inputs.shape == (32, 1, 16, 16)
        assert pert.distances[0] == 0.0  # the instance itself


class TestTextInstance:
    def test_duplicate_tokens_collapse_to_one_feature(self):
        inst = TextInstance("the cat and the dog")
        assert inst.d == 4  # the, cat, and, dog
        assert inst.feature_names == ["the", "cat", "and", "dog"]

    def test_reconstruct_all_ones_returns_original(self):
        text = "The  quick   brown fox"
        inst = TextInstance(text)
        assert inst.reconstruct(np.ones(inst.d)) == text

    def test_removing_feature_removes_all_occurrences(self):
        inst = TextInstance("good food good mood")
        z = np.ones(inst.d)
        z[0] = 0  # 'good'
        assert inst.reconstruct(z) == "food mood"

    def test_empty_text_rejected(self):
        with pytest.raises(ShapeMismatch):
            TextInstance("   ")


class TestPerturbTabular:
    def test_deterministic(self, adult_dataset):
        row = adult_dataset.rows[0]
        a = perturb_tabular(row, adult_dataset, 50, seed=3)
        b = perturb_tabular(row, adult_dataset, 50, seed=3)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_row0_is_instance(self, adult_dataset):
        row = adult_dataset.rows[4]
        rows, binary = perturb_tabular(row, adult_dataset, 10, seed=0)
        assert np.array_equal(rows[0], row)
        assert np.all(binary[0] == 1.0)

    def test_categorical_binary_mean_matches_frequency(self, adult_dataset):
        col = 1  # workclass
        mode_cat = int(np.argmax(adult_dataset.frequencies[col]))
        row = adult_dataset.rows[0].copy()
        row[col] = mode_cat
        _, binary = perturb_tabular(row, adult_dataset, 10000, seed=11)
        expected = adult_dataset.frequencies[col][mode_cat]
        assert abs(binary[1:, col].mean() - expected) < 0.02

    def test_constant_column_binary_always_one(self, tmp_path):
        from percept.data import ingest_csv
        p = tmp_path / "c.csv"
        p.write_text("x,y,label\n" + "".join(
            f"5.0,{v},a\n" for v in range(8)), encoding="utf-8")
        ds = ingest_csv(p)
        rows, binary = perturb_tabular(ds.rows[0], ds, 200, seed=0)
        assert np.all(binary[:, 0] == 1.0)
        assert np.all(rows[:, 0] == 5.0)

    def test_discretize_false_keeps_binary_one_for_continuous(self,
                                                              adult_dataset):
        row = adult_dataset.rows[2]
        rows, binary = perturb_tabular(row, adult_dataset, 100, seed=1,
                                       discretize=False)
        for col in range(adult_dataset.n_features):
            if not adult_dataset.schema.is_categorical(col):
                assert np.all(binary[:, col] == 1.0)
                assert rows[1:, col].std() > 0

    def test_fixed_columns_keep_bin_and_category(self, adult_dataset):
        row = adult_dataset.rows[3]
        rows, binary = perturb_tabular(row, adult_dataset, 300, seed=2,
                                       fixed=(0, 1))
        assert np.all(binary[:, 0] == 1.0)
        assert np.all(binary[:, 1] == 1.0)
        inst_bin = adult_dataset.bin_of(0, row[3 - 3])
        for v in rows[:, 0]:
            assert adult_dataset.bin_of(0, v) == adult_dataset.bin_of(0, row[0])
        assert np.all(rows[:, 1] == row[1])


class TestTabularInstance:
    def test_shap_reconstruct_uses_baseline(self, adult_dataset):
        inst = TabularInstance(adult_dataset.rows[0], adult_dataset)
        z = np.zeros(inst.d)
        out = inst.reconstruct(z)
        assert np.array_equal(out, inst.baseline)
        z[2] = 1
        out = inst.reconstruct(z)
        assert out[2] == adult_dataset.rows[0][2]

    def test_feature_names_describe_bins_and_categories(self, adult_dataset):
        inst = TabularInstance(adult_dataset.rows[0], adult_dataset,
                               discretize=True)
        names = inst.feature_names
        assert any("age" in n for n in names)
        assert any("=" in n for n in names)  # categorical equality

    def test_design_standardized_when_not_discretized(self, adult_dataset):
        inst = TabularInstance(adult_dataset.rows[1], adult_dataset,
                               discretize=False)
        pert = inst.sample(500, seed=9)
        col = 0
        values = pert.design[:, col]
        # N(0, std) noise around the instance, then (v - mean)/std scaling
        center = ((adult_dataset.rows[1][col] - adult_dataset.means[col])
                  / adult_dataset.stds[col])
        assert abs(values.mean() - center) < 0.2
        assert 0.8 < values.std() < 1.25


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 12), st.integers(0, 10 ** 6))
def test_segment_labels_contiguous_property(d, seed):
    rng = np.random.default_rng(seed)
    rows = int(rng.integers(1, 5))
    cols = max(2 // rows, int(rng.integers(1, 5)))
    if rows * cols < 2:
        cols = 2
    img = np.zeros((1, 16, 16), dtype=np.float32)
    seg = grid_segment(img, rows, cols)
    labels = np.unique(seg.labels)
    assert labels.tolist() == list(range(rows * cols))
