"""Sequential network container with taped forward and reverse-mode backward.

The engine runs in float32 and checks every intermediate for NaN/Inf. A
float64 path is available for the finite-difference oracle, which needs the
extra precision to avoid cancellation at small step sizes.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidTarget, ShapeMismatch, UnknownLayerName
from .layers import RULE_STANDARD, Softmax
from .tensor import Tensor, as_array, ensure_finite


@dataclass
class Tape:
    """Recorded activations and gradients, keyed by layer name."""

    activations: dict = field(default_factory=dict)
    gradients: dict = field(default_factory=dict)


class Network:
    """Immutable ordered list of named layers over a fixed input shape."""

    def __init__(self, layers, input_shape, class_count):
        names = [layer.name for layer in layers]
        if len(set(names)) != len(names):
            raise ShapeMismatch("layer names must be unique")
        for i, layer in enumerate(layers):
            if layer.kind == "softmax" and i != len(layers) - 1:
                raise ShapeMismatch("softmax is only supported as the final layer")
        self.layers = tuple(layers)
        self.input_shape = tuple(int(d) for d in input_shape)
        self.class_count = int(class_count)
        self._index = {name: i for i, name in enumerate(names)}
        # validate shape composition once, eagerly
        shape = self.input_shape
        self._out_shapes = []
        for layer in self.layers:
            shape = layer.out_shape(shape)
            self._out_shapes.append(shape)
        if shape != (self.class_count,):
            raise ShapeMismatch(
                f"network output shape {shape} does not match "
                f"{self.class_count} classes")

    @property
    def layer_names(self):
        return [layer.name for layer in self.layers]

    def layer_index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise UnknownLayerName(name, self.layer_names) from None

    def layer_output_shape(self, name):
        return self._out_shapes[self.layer_index(name)]

    def _logits_index(self):
        """Index of the layer whose output is the logits vector."""
        if isinstance(self.layers[-1], Softmax):
            return len(self.layers) - 2
        return len(self.layers) - 1


def _run_layers(net, x, dtype):
    """Forward through all layers, returning the per-layer input list and outputs."""
    inputs = []
    out = x.astype(dtype, copy=False)
    check = dtype == np.float32
    for layer in net.layers:
        inputs.append(out)
        out = layer.forward(out)
        if check:
            ensure_finite(out, f"forward of layer {layer.name!r}")
    return inputs, out


def forward(net, input, record=(), dtype=np.float32):
    """Evaluate the network on one input.

    Returns (logits, probs, tape) where tape.activations holds the output of
    every layer named in `record`.
    """
    x = as_array(input, dtype)
    if tuple(x.shape) != net.input_shape:
        raise ShapeMismatch(
            f"input shape {tuple(x.shape)} != network input shape {net.input_shape}")
    for name in record:
        net.layer_index(name)  # raises UnknownLayerName
    inputs, out = _run_layers(net, x, dtype)
    li = net._logits_index()
    # logits are the input of the trailing softmax, or the final output
    logits = inputs[li + 1] if li + 1 < len(net.layers) else out
    if isinstance(net.layers[-1], Softmax):
        probs = out
    else:
        probs = Softmax("_probs").forward(logits)
    tape = Tape()
    for name in record:
        i = net.layer_index(name)
        value = inputs[i + 1] if i + 1 < len(net.layers) else out
        tape.activations[name] = Tensor(value) if dtype == np.float32 else value
    if dtype == np.float32:
        return Tensor(logits), Tensor(probs), tape
    return logits, probs, tape


def _backprop(net, inputs, start, seed_grad, stop=None, rule=RULE_STANDARD,
              tape=None):
    """Propagate `seed_grad` (gradient at layer `start`'s output) backwards.

    Returns the gradient at layer `stop`'s output, or at the network input
    when stop is None. When a tape is given, gradients for all of its
    recorded activations along the path are filled in.
    """
    grad = seed_grad
    record_names = set(tape.activations) if tape is not None else set()

    def maybe_record(layer_idx, g):
        if layer_idx >= 0:
            name = net.layers[layer_idx].name
            if name in record_names:
                tape.gradients[name] = Tensor(g)

    maybe_record(start, grad)
    if stop == start:
        return grad
    for i in range(start, -1, -1):
        layer = net.layers[i]
        grad = layer.backward(inputs[i], grad, rule=rule)
        ensure_finite(grad, f"backward of layer {layer.name!r}")
        maybe_record(i - 1, grad)
        if stop == i - 1:
            return grad
    return grad


def backward(net, input, target, to="input", rule=RULE_STANDARD,
             source="logit", tape=None):
    """Gradient of the target class score w.r.t. the input or a named layer.

    `source` selects the differentiated score: the raw logit (default) or the
    post-softmax probability. Under the guided rule, ReLU layers pass gradient
    only where both the forward input and the incoming gradient are positive.
    """
    if not (0 <= int(target) < net.class_count):
        raise InvalidTarget(
            f"target {target} out of range for {net.class_count} classes")
    if source not in ("logit", "prob"):
        raise InvalidTarget(f"source must be 'logit' or 'prob', got {source!r}")
    x = as_array(input, np.float32)
    if tuple(x.shape) != net.input_shape:
        raise ShapeMismatch(
            f"input shape {tuple(x.shape)} != network input shape {net.input_shape}")

    stop = None
    if to != "input":
        stop = net.layer_index(to)

    inputs, out = _run_layers(net, x, np.float32)
    if tape is not None:
        for name in tape.activations:
            net.layer_index(name)

    one_hot = np.zeros((net.class_count,), dtype=np.float32)
    one_hot[int(target)] = 1.0
    li = net._logits_index()
    if source == "prob" and isinstance(net.layers[-1], Softmax):
        start = len(net.layers) - 1
    elif source == "prob":
        # no softmax layer: differentiate softmax(logits)[target] analytically
        logits = out
        p = Softmax("_probs").forward(logits)
        one_hot = p * (one_hot - np.dot(one_hot, p))
        start = li
    else:
        start = li

    if stop is not None and stop > start:
        raise UnknownLayerName(to, net.layer_names[:start + 1])

    grad = _backprop(net, inputs, start, one_hot, stop=stop, rule=rule, tape=tape)
    return Tensor(grad)


def layer_backward(net, input, layer_name, seed_grad, rule=RULE_STANDARD):
    """Gradient of an arbitrary scalar objective w.r.t. the network input.

    `seed_grad` is d(objective)/d(output of `layer_name`); used by the
    activation-maximization and inversion loops.
    """
    x = as_array(input, np.float32)
    if tuple(x.shape) != net.input_shape:
        raise ShapeMismatch(
            f"input shape {tuple(x.shape)} != network input shape {net.input_shape}")
    idx = net.layer_index(layer_name)
    seed = as_array(seed_grad, np.float32)
    expected = net.layer_output_shape(layer_name)
    if tuple(seed.shape) != tuple(expected):
        raise ShapeMismatch(
            f"seed gradient shape {tuple(seed.shape)} != layer output {expected}")
    inputs, _ = _run_layers(net, x, np.float32)
    grad = _backprop(net, inputs, idx, seed, stop=None, rule=rule)
    return Tensor(grad)


def gradient_check(net, input, target, epsilon, coords=200, seed=0):
    """Max relative error of backward() against central finite differences.

    Probes a fixed seeded subsample of at least `coords` input coordinates;
    the numeric side runs the forward pass in float64.
    """
    if epsilon <= 0:
        raise InvalidTarget("epsilon must be positive")
    analytic = backward(net, input, target, to="input").array.reshape(-1)
    x64 = as_array(input, np.float64).reshape(-1)
    n = x64.size
    rng = np.random.default_rng(seed)
    if n <= coords:
        picks = np.arange(n)
    else:
        picks = rng.choice(n, size=coords, replace=False)

    li = net._logits_index()

    def logit_at(flat):
        arr = flat.reshape(net.input_shape)
        inputs, out = _run_layers(net, arr, np.float64)
        logits = inputs[li + 1] if li + 1 < len(net.layers) else out
        return logits[int(target)]

    max_rel = 0.0
    for i in picks:
        xp = x64.copy()
        xp[i] += epsilon
        xm = x64.copy()
        xm[i] -= epsilon
        numeric = (logit_at(xp) - logit_at(xm)) / (2.0 * epsilon)
        a = float(analytic[i])
        rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-6)
        max_rel = max(max_rel, rel)
    return max_rel
