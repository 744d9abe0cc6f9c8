"""Reference models and black-box predictor builders.

A Predictor is anything with ``predict_proba(batch) -> (N, K) rows`` where
each row is a probability distribution. Perturbation explainers touch the
model only through this contract.
"""

import numpy as np

from .errors import ShapeMismatch
from .layers import Conv2d, Dense, Flatten, MaxPool2d, ReLU, Softmax
from .network import Network, forward
from .tensor import as_array

REFERENCE_LAYER_NAMES = [
    "conv1", "relu1", "pool1", "conv2", "relu2", "pool2",
    "flatten", "fc1", "relu3", "fc2", "softmax",
]


def _softmax_rows(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def build_reference_cnn(seed=7, planted=False):
    """Deterministic 1x16x16-input, 4-class CNN with fixed layer names.

    Weights come from a seeded uniform(-0.5, 0.5) generator. With
    ``planted=True`` the weights are hand-set so that the class-0 logit
    depends only on pixels inside the top-left input quadrant:

    * conv1 channel 0 fires (0.6) exactly along the top image row, channel 1
      along the left column — both read zero padding, so they are immune to
      pixel values for inputs bounded away from black (values >= 0.2).
    * conv2 channel 0 requires top-edge AND left-edge evidence plus local
      brightness, so it activates only at the top-left corner cell with
      value 0.5 * (max pixel in the 2x2 corner block).
    * conv2 channels 1..7 carry a large negative bias and are identically
      zero on any [0,1] input, which pins their CAM weights to exactly zero.
    * fc1 unit 0 and fc2 row 0 route only that corner activation into the
      class-0 logit; the remaining class rows are scaled small.
    """
    rng = np.random.default_rng(seed)

    def u(shape):
        return rng.uniform(-0.5, 0.5, size=shape).astype(np.float32)

    conv1_w, conv1_b = u((4, 1, 3, 3)), u((4,))
    conv2_w, conv2_b = u((8, 4, 3, 3)), u((8,))
    fc1_w, fc1_b = u((32, 128)), u((32,))
    fc2_w, fc2_b = u((4, 32)), u((4,))

    if planted:
        conv1_w[0] = 0.0
        conv1_w[0, 0, 0, :] = -2.0  # three upper neighbours
        conv1_b[0] = 0.6
        conv1_w[1] = 0.0
        conv1_w[1, 0, :, 0] = -2.0  # three left neighbours
        conv1_b[1] = 0.6
        conv1_w[2] = 0.0
        conv1_w[2, 0, 1, 1] = 1.0  # pass-through brightness channel
        conv1_b[2] = 0.0

        conv2_w[0] = 0.0
        conv2_w[0, 0, 1, 1] = 1.0
        conv2_w[0, 1, 1, 1] = 1.0
        conv2_w[0, 2, 1, 1] = 0.5
        conv2_b[0] = -1.2
        conv2_w[1:] *= 0.5
        conv2_w[1:, 0:2] = 0.0  # edge channels feed the detector only
        conv2_b[1:] = -20.0  # dead for every [0,1] input

        fc1_w[0] = 0.0
        fc1_w[0, 0] = 1.0  # flat index 0 == pool2[channel 0, 0, 0]
        fc1_b[0] = 0.0
        fc2_w[0] = 0.0
        fc2_w[0, 0] = 8.0
        fc2_b[0] = -1.0
        fc2_w[1:] *= 0.05
        fc2_b[1:] = np.array([0.1, 0.0, -0.1], dtype=np.float32)

    layers = [
        Conv2d("conv1", conv1_w, conv1_b, stride=1, padding=1),
        ReLU("relu1"),
        MaxPool2d("pool1", kernel=2, stride=2),
        Conv2d("conv2", conv2_w, conv2_b, stride=1, padding=1),
        ReLU("relu2"),
        MaxPool2d("pool2", kernel=2, stride=2),
        Flatten("flatten"),
        Dense("fc1", fc1_w, fc1_b),
        ReLU("relu3"),
        Dense("fc2", fc2_w, fc2_b),
        Softmax("softmax"),
    ]
    return Network(layers, input_shape=(1, 16, 16), class_count=4)


class NetworkPredictor:
    """Adapts a Network to the batched predict_proba contract."""

    def __init__(self, net, class_names=None):
        self.net = net
        self.class_names = list(class_names) if class_names else None

    def predict_proba(self, batch):
        batch = np.asarray(batch, dtype=np.float32)
        n = batch.shape[0]
        flat_size = int(np.prod(self.net.input_shape))
        if batch.ndim == 2 and batch.shape[1] == flat_size:
            batch = batch.reshape((n,) + self.net.input_shape)
        elif batch.shape[1:] != self.net.input_shape:
            raise ShapeMismatch(
                f"batch item shape {batch.shape[1:]} does not match "
                f"network input {self.net.input_shape}")
        out = np.empty((n, self.net.class_count), dtype=np.float64)
        for i in range(n):
            _, probs, _ = forward(self.net, batch[i])
            out[i] = probs.array
        return out


class LinearTabularPredictor:
    """predict_proba(X) = row-wise softmax(X @ W.T + b)."""

    def __init__(self, weights, bias):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.bias = np.asarray(bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ShapeMismatch("weights must be (K, D) with bias (K,)")

    def predict_proba(self, batch):
        x = np.asarray(batch, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.weights.shape[1]:
            raise ShapeMismatch(
                f"batch shape {x.shape} incompatible with weights "
                f"{self.weights.shape}")
        return _softmax_rows(x @ self.weights.T + self.bias)


def build_linear_tabular(weights, bias):
    return LinearTabularPredictor(weights, bias)


class BowTextPredictor:
    """Whitespace-tokenized bag-of-words classifier.

    Tokens are lowercased; out-of-vocabulary tokens contribute nothing.
    """

    def __init__(self, vocab, weights, bias=None):
        self.vocab = {tok.lower(): i for i, tok in enumerate(vocab)}
        self.weights = np.asarray(weights, dtype=np.float64)
        if self.weights.ndim != 2 or self.weights.shape[1] != len(vocab):
            raise ShapeMismatch("weights must be (K, len(vocab))")
        k = self.weights.shape[0]
        self.bias = (np.zeros(k) if bias is None
                     else np.asarray(bias, dtype=np.float64))
        if self.bias.shape != (k,):
            raise ShapeMismatch("bias must be (K,)")

    def predict_proba(self, texts):
        if isinstance(texts, str):
            texts = [texts]
        scores = np.tile(self.bias, (len(texts), 1))
        for row, text in enumerate(texts):
            for token in text.lower().split():
                idx = self.vocab.get(token)
                if idx is not None:
                    scores[row] += self.weights[:, idx]
        return _softmax_rows(scores)


def build_bow_text_classifier(vocab, weights, bias=None):
    return BowTextPredictor(vocab, weights, bias)


class CentroidTabularPredictor:
    """Nearest-centroid classifier over standardized columns.

    Deterministic, training-free stand-in predictor derived from a Dataset;
    used by the CLI when no user model is supplied.
    """

    def __init__(self, dataset, temperature=1.0):
        self.means = dataset.means.copy()
        scales = dataset.stds.copy()
        scales[scales == 0] = 1.0
        self.scales = scales
        self.temperature = float(temperature)
        k = len(dataset.schema.class_names)
        d = dataset.rows.shape[1]
        self.centroids = np.zeros((k, d))
        std_rows = (dataset.rows - self.means) / self.scales
        for c in range(k):
            member = dataset.labels == c
            if member.any():
                self.centroids[c] = std_rows[member].mean(axis=0)
        self.class_names = list(dataset.schema.class_names)

    def predict_proba(self, batch):
        x = (np.asarray(batch, dtype=np.float64) - self.means) / self.scales
        d2 = ((x[:, None, :] - self.centroids[None, :, :]) ** 2).sum(axis=2)
        return _softmax_rows(-d2 / self.temperature)


POSITIVE_WORDS = ["good", "great", "excellent", "tasty", "friendly",
                  "lovely", "wonderful", "generous"]
NEGATIVE_WORDS = ["bad", "awful", "terrible", "slow", "rude", "bland",
                  "dirty", "stale", "cold", "careless"]


def build_demo_sentiment_classifier():
    """Fixed-lexicon sentiment model used by the CLI's text explainers."""
    vocab = POSITIVE_WORDS + NEGATIVE_WORDS
    k_pos = len(POSITIVE_WORDS)
    weights = np.zeros((2, len(vocab)))
    weights[0, :k_pos] = 2.0  # class 0: positive
    weights[1, k_pos:] = 2.0  # class 1: negative
    return BowTextPredictor(vocab, weights)


def as_predict_fn(predictor):
    """Accept either a predict_proba-bearing object or a bare callable."""
    fn = getattr(predictor, "predict_proba", None)
    return fn if fn is not None else predictor


def wrap_image_rows(net):
    """Predictor view of a Network for flattened-row batches."""
    return NetworkPredictor(net)


def quadrant_test_input(seed, low=0.2, high=1.0):
    """Seeded random image bounded away from black.

    The planted CNN's edge detectors key on zero padding; inputs with pixel
    values >= 0.2 can never fake an image edge, which makes the planted
    localization exact.
    """
    rng = np.random.default_rng(seed)
    return rng.uniform(low, high, size=(1, 16, 16)).astype(np.float32)


def network_input_from(values, net):
    arr = as_array(values)
    if tuple(arr.shape) != net.input_shape:
        raise ShapeMismatch(
            f"input shape {tuple(arr.shape)} != network input {net.input_shape}")
    return arr
