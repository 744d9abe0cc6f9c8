"""CSV ingestion for mixed categorical/continuous tables.

The reader is deliberately strict: UTF-8, comma separated, one header line,
no quoting. Categorical columns are label-encoded in first-seen order so
ingestion is deterministic. Continuous statistics use the population standard
deviation and nearest-rank quartiles.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDataset, InconsistentArity, ParseError


@dataclass
class TabularSchema:
    feature_names: list
    class_names: list
    categorical_features: set
    categorical_names: dict  # column index -> list of category labels

    def is_categorical(self, col):
        return col in self.categorical_features


@dataclass
class Dataset:
    rows: np.ndarray  # (N, D) float64, categorical columns label-encoded
    labels: np.ndarray  # (N,) int class indices
    schema: TabularSchema
    label_name: str = "label"
    means: np.ndarray = field(init=False)
    stds: np.ndarray = field(init=False)
    mins: np.ndarray = field(init=False)
    maxs: np.ndarray = field(init=False)
    frequencies: dict = field(init=False)  # col -> per-category empirical freq
    quartiles: dict = field(init=False)  # col -> (q1, q2, q3)

    def __post_init__(self):
        if self.rows.size == 0:
            raise EmptyDataset("dataset has no rows")
        self.rows = np.asarray(self.rows, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.means = self.rows.mean(axis=0)
        self.stds = self.rows.std(axis=0)  # population std
        self.mins = self.rows.min(axis=0)
        self.maxs = self.rows.max(axis=0)
        self.frequencies = {}
        self.quartiles = {}
        for col in range(self.rows.shape[1]):
            if self.schema.is_categorical(col):
                n_cat = len(self.schema.categorical_names[col])
                counts = np.bincount(
                    self.rows[:, col].astype(np.int64), minlength=n_cat)
                self.frequencies[col] = counts / counts.sum()
            else:
                self.quartiles[col] = quartile_boundaries(self.rows[:, col])

    @property
    def n_features(self):
        return self.rows.shape[1]

    def bin_of(self, col, value):
        """Quartile bin index (0..3) of a continuous value; ties bin low."""
        q1, q2, q3 = self.quartiles[col]
        return int(value > q1) + int(value > q2) + int(value > q3)

    def bin_range(self, col, bin_index):
        """[lo, hi] value range of a quartile bin."""
        q1, q2, q3 = self.quartiles[col]
        edges = [self.mins[col], q1, q2, q3, self.maxs[col]]
        lo = edges[bin_index]
        hi = edges[bin_index + 1]
        if hi < lo:  # degenerate quartiles on skewed columns
            hi = lo
        return lo, hi

    def statistics(self):
        """Comparable snapshot of all per-column statistics."""
        return {
            "means": self.means.tolist(),
            "stds": self.stds.tolist(),
            "frequencies": {c: f.tolist() for c, f in self.frequencies.items()},
            "quartiles": {c: list(q) for c, q in self.quartiles.items()},
        }


def quartile_boundaries(values):
    """Nearest-rank quartiles (q1, q2, q3); non-decreasing by construction."""
    ordered = np.sort(np.asarray(values, dtype=np.float64))
    n = ordered.size
    picks = [ordered[max(0, math.ceil(k * n / 4) - 1)] for k in (1, 2, 3)]
    return tuple(float(v) for v in picks)


def _try_float(token):
    try:
        return float(token)
    except ValueError:
        return None


def ingest_csv(path, categorical_columns=None, label_column="last"):
    """Parse a headered CSV into a Dataset.

    `categorical_columns` may name header columns or give indices; when
    omitted, any column containing a non-numeric token is treated as
    categorical. `label_column` selects the class column ("last" by default).
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n").rstrip("\r") for ln in fh]
    lines = [ln for ln in lines if ln != ""]
    if not lines:
        raise EmptyDataset(f"{path} is empty")
    header = lines[0].split(",")
    width = len(header)
    cells = []
    for r, line in enumerate(lines[1:], start=1):
        parts = line.split(",")
        if len(parts) != width:
            raise InconsistentArity(
                f"row {r} has {len(parts)} fields, header has {width} "
                "(embedded commas are not supported)")
        cells.append([p.strip() for p in parts])
    if not cells:
        raise EmptyDataset(f"{path} has a header but no data rows")

    if label_column == "last":
        label_idx = width - 1
    elif isinstance(label_column, str):
        if label_column not in header:
            raise ParseError(f"label column {label_column!r} not in header",
                             0, -1)
        label_idx = header.index(label_column)
    else:
        label_idx = int(label_column)

    feature_idx = [c for c in range(width) if c != label_idx]
    feature_names = [header[c] for c in feature_idx]

    hinted = None
    if categorical_columns is not None:
        hinted = set()
        for c in categorical_columns:
            if isinstance(c, str):
                if c not in header:
                    raise ParseError(f"unknown categorical column {c!r}", 0, -1)
                c = header.index(c)
            hinted.add(int(c))

    categorical = set()
    for out_col, src in enumerate(feature_idx):
        if hinted is not None:
            if src in hinted:
                categorical.add(out_col)
        elif any(_try_float(row[src]) is None for row in cells):
            categorical.add(out_col)

    categorical_names = {c: [] for c in categorical}
    seen = {c: {} for c in categorical}
    rows = np.empty((len(cells), len(feature_idx)), dtype=np.float64)
    for r, row in enumerate(cells, start=1):
        for out_col, src in enumerate(feature_idx):
            token = row[src]
            if out_col in categorical:
                codes = seen[out_col]
                if token not in codes:
                    codes[token] = len(codes)
                    categorical_names[out_col].append(token)
                rows[r - 1, out_col] = codes[token]
            else:
                value = _try_float(token)
                if value is None:
                    raise ParseError(
                        f"non-numeric value {token!r} in continuous column "
                        f"{header[src]!r}", r, src)
                rows[r - 1, out_col] = value

    class_names = []
    class_codes = {}
    labels = np.empty(len(cells), dtype=np.int64)
    for r, row in enumerate(cells):
        token = row[label_idx]
        if token not in class_codes:
            class_codes[token] = len(class_codes)
            class_names.append(token)
        labels[r] = class_codes[token]

    schema = TabularSchema(
        feature_names=feature_names,
        class_names=class_names,
        categorical_features=categorical,
        categorical_names=categorical_names,
    )
    return Dataset(rows=rows, labels=labels, schema=schema,
                   label_name=header[label_idx])


def write_csv(dataset, path):
    """Serialize a Dataset back to CSV; re-ingesting reproduces statistics."""
    schema = dataset.schema
    header = list(schema.feature_names) + [dataset.label_name]
    lines = [",".join(header)]
    for r in range(dataset.rows.shape[0]):
        parts = []
        for c in range(dataset.rows.shape[1]):
            v = dataset.rows[r, c]
            if schema.is_categorical(c):
                parts.append(schema.categorical_names[c][int(v)])
            else:
                parts.append(repr(float(v)))
        parts.append(schema.class_names[int(dataset.labels[r])])
        lines.append(",".join(parts))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
