"""Interpretable feature spaces per modality and their perturbation samplers.

Each instance type maps the raw model input to d binary (or discretized)
features and can rebuild model inputs from feature vectors. Reconstructing
the all-ones vector reproduces the original instance exactly for images and
text.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyDataset, InvalidGrid, ShapeMismatch
from ..tensor import as_array


@dataclass
class SegmentMap:
    """H x W integer labels; labels form the contiguous set 0..d-1."""

    labels: np.ndarray

    def __post_init__(self):
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int32)
        if self.labels.ndim != 2:
            raise ShapeMismatch("segment labels must be 2-D")
        present = np.unique(self.labels)
        if present[0] != 0 or present[-1] != present.size - 1:
            raise InvalidGrid("segment labels must be contiguous from 0")

    @property
    def count(self):
        return int(self.labels.max()) + 1


def grid_segment(image, rows, cols):
    """Partition an image into a rows x cols grid of near-equal rectangles.

    Labels run in row-major order.
    """
    arr = as_array(image)
    if arr.ndim == 3:
        h, w = arr.shape[1], arr.shape[2]
    elif arr.ndim == 2:
        h, w = arr.shape
    else:
        raise ShapeMismatch("expected (C,H,W) or (H,W) image")
    if rows * cols < 2:
        raise InvalidGrid("grid needs at least 2 cells")
    if rows > h or cols > w or rows < 1 or cols < 1:
        raise InvalidGrid(f"grid {rows}x{cols} does not fit a {h}x{w} image")
    row_edges = [(i * h) // rows for i in range(rows + 1)]
    col_edges = [(j * w) // cols for j in range(cols + 1)]
    labels = np.empty((h, w), dtype=np.int32)
    for i in range(rows):
        for j in range(cols):
            labels[row_edges[i]:row_edges[i + 1],
                   col_edges[j]:col_edges[j + 1]] = i * cols + j
    return SegmentMap(labels)


def sample_masks(d, n, seed, p_keep=0.5):
    """n x d i.i.d. Bernoulli(p_keep) binary matrix; row 0 is all ones."""
    rng = np.random.default_rng(seed)
    masks = (rng.random((n, d)) < p_keep).astype(np.float64)
    if n > 0:
        masks[0] = 1.0
    return masks


def _cosine_distance_to_ones(masks):
    d = masks.shape[1]
    kept = masks.sum(axis=1)
    out = np.ones(masks.shape[0])
    nonzero = kept > 0
    out[nonzero] = 1.0 - np.sqrt(kept[nonzero] / d)
    return out


@dataclass
class Perturbations:
    """One batch of perturbed instances in both representations."""

    design: np.ndarray  # (n, d) surrogate design matrix
    binary: np.ndarray  # (n, d) 0/1 feature-on indicators
    inputs: object  # model-ready batch (ndarray or list of strings)
    distances: np.ndarray  # (n,) distance of each sample to the instance


class ImageInstance:
    """Segments of one image as interpretable features.

    Masked-off segments are filled with the per-image per-channel mean color
    (or an explicit baseline value).
    """

    modality = "image"

    def __init__(self, image, segments, baseline=None):
        self.image = as_array(image)
        if self.image.ndim != 3:
            raise ShapeMismatch("image must be (C, H, W)")
        if segments.labels.shape != self.image.shape[1:]:
            raise ShapeMismatch(
                f"segment map {segments.labels.shape} does not match image "
                f"{self.image.shape[1:]}")
        self.segments = segments
        if baseline is None:
            fill = self.image.mean(axis=(1, 2))
        else:
            fill = np.broadcast_to(
                np.asarray(baseline, dtype=np.float32), (self.image.shape[0],))
        self.fill = fill.astype(np.float32)
        self.kernel_width = 0.25

    @property
    def d(self):
        return self.segments.count

    @property
    def feature_names(self):
        return [f"segment_{i}" for i in range(self.d)]

    def predicate_name(self, feature):
        return f"segment_{feature} on"

    def reconstruct(self, z):
        z = np.asarray(z)
        if z.all():
            return self.image.copy()
        off = ~z.astype(bool)[self.segments.labels]  # (H, W)
        out = self.image.copy()
        out[:, off] = self.fill[:, None]
        return out

    def sample(self, n, seed, p_keep=0.5, fixed=()):
        masks = sample_masks(self.d, n, seed, p_keep)
        if len(fixed):
            masks[:, list(fixed)] = 1.0
        batch = np.stack([self.reconstruct(m) for m in masks])
        return Perturbations(
            design=masks,
            binary=masks,
            inputs=batch,
            distances=_cosine_distance_to_ones(masks),
        )


class TextInstance:
    """Distinct tokens of one text as interpretable features.

    Tokens are split on whitespace and matched case-insensitively; turning a
    feature off removes every occurrence of that token.
    """

    modality = "text"

    def __init__(self, text):
        self.text = text
        self.tokens = text.split()
        if not self.tokens:
            raise ShapeMismatch("text instance needs at least one token")
        self._names = []
        self._feature_of = []
        seen = {}
        for token in self.tokens:
            key = token.lower()
            if key not in seen:
                seen[key] = len(seen)
                self._names.append(token)
            self._feature_of.append(seen[key])
        self._feature_of = np.array(self._feature_of)
        self.kernel_width = 0.25

    @property
    def d(self):
        return len(self._names)

    @property
    def feature_names(self):
        return list(self._names)

    def predicate_name(self, feature):
        return f"'{self._names[feature]}' present"

    def reconstruct(self, z):
        z = np.asarray(z)
        if z.all():
            return self.text
        keep = z.astype(bool)[self._feature_of]
        return " ".join(t for t, k in zip(self.tokens, keep) if k)

    def sample(self, n, seed, p_keep=0.5, fixed=()):
        masks = sample_masks(self.d, n, seed, p_keep)
        if len(fixed):
            masks[:, list(fixed)] = 1.0
        texts = [self.reconstruct(m) for m in masks]
        return Perturbations(
            design=masks,
            binary=masks,
            inputs=texts,
            distances=_cosine_distance_to_ones(masks),
        )


def perturb_tabular(row, dataset, n, seed, discretize=True, fixed=()):
    """Draw n perturbed rows around `row` plus their binary feature matrix.

    discretize=True: continuous columns move through quartile bins (binary
    feature: perturbed value falls in the instance's bin; values are drawn
    uniformly inside a uniformly sampled bin); categorical columns resample
    from empirical frequencies (binary feature: category unchanged).
    discretize=False: continuous columns get N(0, column std) noise and their
    binary feature stays 1; categorical handling is unchanged.

    Columns listed in `fixed` are constrained to keep their binary feature at
    1 (same bin / same category). Row 0 is always the unperturbed instance.
    """
    if dataset.rows.shape[0] == 0:
        raise EmptyDataset("cannot perturb against an empty dataset")
    row = np.asarray(row, dtype=np.float64)
    d = dataset.n_features
    if row.shape != (d,):
        raise ShapeMismatch(f"row has shape {row.shape}, expected ({d},)")
    rng = np.random.default_rng(seed)
    fixed = set(fixed)
    out = np.tile(row, (n, 1))
    binary = np.ones((n, d))
    for col in range(d):
        if dataset.schema.is_categorical(col):
            freqs = dataset.frequencies[col]
            if col in fixed:
                cats = np.full(n - 1, row[col])
            else:
                cats = rng.choice(len(freqs), size=n - 1, p=freqs).astype(np.float64)
            out[1:, col] = cats
            binary[1:, col] = (cats == row[col]).astype(np.float64)
        elif discretize:
            inst_bin = dataset.bin_of(col, row[col])
            if col in fixed:
                bins = np.full(n - 1, inst_bin)
            else:
                bins = rng.integers(0, 4, size=n - 1)
            u = rng.random(n - 1)
            values = np.empty(n - 1)
            for b in range(4):
                members = bins == b
                if not members.any():
                    continue
                lo, hi = dataset.bin_range(col, b)
                values[members] = lo + u[members] * (hi - lo)
            out[1:, col] = values
            recomputed = np.array([dataset.bin_of(col, v) for v in values])
            binary[1:, col] = (recomputed == inst_bin).astype(np.float64)
        else:
            std = dataset.stds[col]
            noise = rng.normal(0.0, std if std > 0 else 0.0, size=n - 1)
            if col in fixed:
                noise[:] = 0.0
            out[1:, col] = row[col] + noise
    return out, binary


class TabularInstance:
    """One table row as interpretable features over a Dataset's statistics."""

    modality = "tabular"

    def __init__(self, row, dataset, discretize=True, baseline=None):
        self.row = np.asarray(row, dtype=np.float64)
        self.dataset = dataset
        self.discretize = discretize
        if baseline is None:
            baseline = dataset.means.copy()
            for col in dataset.schema.categorical_features:
                # mode category stands in for the per-column mean
                baseline[col] = int(np.argmax(dataset.frequencies[col]))
        self.baseline = np.asarray(baseline, dtype=np.float64)
        if self.baseline.shape != self.row.shape:
            raise ShapeMismatch("baseline shape must match the row")
        self.kernel_width = float(np.sqrt(self.d) * 0.75)

    @property
    def d(self):
        return self.row.shape[0]

    @property
    def feature_names(self):
        schema = self.dataset.schema
        names = []
        for col, name in enumerate(schema.feature_names):
            if schema.is_categorical(col):
                cat = schema.categorical_names[col][int(self.row[col])]
                names.append(f"{name}={cat}")
            elif self.discretize:
                names.append(self._bin_label(col))
            else:
                names.append(name)
        return names

    def _bin_label(self, col):
        name = self.dataset.schema.feature_names[col]
        q1, q2, q3 = self.dataset.quartiles[col]
        b = self.dataset.bin_of(col, self.row[col])
        if b == 0:
            return f"{name} <= {q1:g}"
        if b == 1:
            return f"{q1:g} < {name} <= {q2:g}"
        if b == 2:
            return f"{q2:g} < {name} <= {q3:g}"
        return f"{name} > {q3:g}"

    def predicate_name(self, feature):
        return self.feature_names[feature]

    def reconstruct(self, z):
        """Feature off -> baseline value; used by the SHAP coalition game."""
        z = np.asarray(z).astype(bool)
        out = self.baseline.copy()
        out[z] = self.row[z]
        return out

    def _distances(self, rows):
        schema = self.dataset.schema
        acc = np.zeros(rows.shape[0])
        for col in range(self.d):
            if schema.is_categorical(col):
                acc += (rows[:, col] != self.row[col]).astype(np.float64)
            else:
                std = self.dataset.stds[col]
                scale = std if std > 0 else 1.0
                acc += ((rows[:, col] - self.row[col]) / scale) ** 2
        return np.sqrt(acc)

    def sample(self, n, seed, p_keep=0.5, fixed=()):
        rows, binary = perturb_tabular(self.row, self.dataset, n, seed,
                                       discretize=self.discretize, fixed=fixed)
        if self.discretize:
            design = binary.copy()
        else:
            design = rows.copy()
            for col in range(self.d):
                if self.dataset.schema.is_categorical(col):
                    design[:, col] = binary[:, col]
                else:
                    std = self.dataset.stds[col]
                    scale = std if std > 0 else 1.0
                    design[:, col] = (rows[:, col] - self.dataset.means[col]) / scale
        return Perturbations(
            design=design,
            binary=binary,
            inputs=rows,
            distances=self._distances(rows),
        )
