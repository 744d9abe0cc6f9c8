"""Input-space optimization: activation maximization, deep dream, inversion.

Plain fixed-step gradient ascent/descent with optional seeded integer jitter
and clamping to the valid input range [0, 1]. Traces record one objective
value per iteration, measured on the current image at the iteration start;
maximization traces record the raw activation objective (regularizers
excluded), inversion traces record the full objective.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    FilterIndexOutOfRange,
    ImageShapeMismatch,
    ShapeMismatch,
    ZeroTargetActivation,
)
from .network import backward, forward, layer_backward
from .tensor import Tensor, as_array

MAX_DEFAULT_LR = 0.05
MAX_DEFAULT_DECAY = 1e-4
MAX_DEFAULT_JITTER = 2
INV_DEFAULT_LR = 0.5
INV_DEFAULT_TV = 1e-2
INV_DEFAULT_ALPHA = 1e-4


@dataclass
class OptimizationConfig:
    """Target, budget, step size, and regularizer weights for one run."""

    target: tuple  # ("filter", layer, idx) | ("layer", layer) | ("logit", cls) | ("inverted", layer)
    num_iter: int = 10
    learning_rate: float = MAX_DEFAULT_LR
    l2_decay: float = MAX_DEFAULT_DECAY
    tv_weight: float = 0.0
    alpha_weight: float = 0.0  # weight of the sixth-power norm (inversion)
    jitter: int = MAX_DEFAULT_JITTER
    seed: int = 0
    init_image: object = None  # None -> seeded near-gray noise
    snapshot_every: int = 0

    def __post_init__(self):
        if self.num_iter < 1:
            raise ShapeMismatch("num_iter must be >= 1")
        if self.learning_rate < 0:
            raise ShapeMismatch("learning rate must be >= 0")
        if min(self.l2_decay, self.tv_weight, self.alpha_weight) < 0:
            raise ShapeMismatch("regularizer weights must be >= 0")
        if self.jitter < 0:
            raise ShapeMismatch("jitter amplitude must be >= 0")

    @classmethod
    def for_maximization(cls, target, **kw):
        return cls(target=target, **kw)

    @classmethod
    def for_inversion(cls, layer, **kw):
        kw.setdefault("learning_rate", INV_DEFAULT_LR)
        kw.setdefault("tv_weight", INV_DEFAULT_TV)
        kw.setdefault("alpha_weight", INV_DEFAULT_ALPHA)
        kw.setdefault("jitter", 0)
        kw.setdefault("l2_decay", 0.0)
        return cls(target=("inverted", layer), **kw)


@dataclass
class OptimizationTrace:
    objectives: list = field(default_factory=list)
    final_image: Tensor = None
    snapshots: list = None

    def to_dict(self, target, cfg):
        return {
            "target": list(target),
            "config": {
                "num_iter": cfg.num_iter,
                "learning_rate": cfg.learning_rate,
                "l2_decay": cfg.l2_decay,
                "tv_weight": cfg.tv_weight,
                "alpha_weight": cfg.alpha_weight,
                "jitter": cfg.jitter,
                "seed": cfg.seed,
            },
            "objectives": [float(v) for v in self.objectives],
        }


def _noise_init(net, seed):
    rng = np.random.default_rng(seed)
    return rng.uniform(0.45, 0.55, size=net.input_shape).astype(np.float32)


def _resolve_init(net, cfg):
    if cfg.init_image is None:
        return _noise_init(net, cfg.seed)
    img = as_array(cfg.init_image)
    if tuple(img.shape) != net.input_shape:
        raise ImageShapeMismatch(
            f"init image shape {tuple(img.shape)} != network input "
            f"{net.input_shape}")
    return img.copy()


def total_variation(x, eps=1e-8):
    """Isotropic TV value and gradient for a (C, H, W) image."""
    x = np.asarray(x, dtype=np.float64)
    dh = np.zeros_like(x)
    dw = np.zeros_like(x)
    dh[:, :-1, :] = x[:, 1:, :] - x[:, :-1, :]
    dw[:, :, :-1] = x[:, :, 1:] - x[:, :, :-1]
    mag = np.sqrt(dh ** 2 + dw ** 2 + eps)
    value = float(mag.sum())
    grad = -(dh + dw) / mag
    grad[:, 1:, :] += dh[:, :-1, :] / mag[:, :-1, :]
    grad[:, :, 1:] += dw[:, :, :-1] / mag[:, :, :-1]
    return value, grad.astype(np.float32)


def _activation_objective(net, x, target):
    """Objective value and its input gradient for a maximization target."""
    kind = target[0]
    if kind == "logit":
        cls = int(target[1])
        logits, _, _ = forward(net, x)
        grad = backward(net, x, cls, to="input").array
        return float(logits.array[cls]), grad
    layer = target[1]
    _, _, tape = forward(net, x, record={layer})
    act = tape.activations[layer].array
    if kind == "filter":
        idx = int(target[2])
        if act.ndim < 1 or not 0 <= idx < act.shape[0]:
            raise FilterIndexOutOfRange(
                f"filter {idx} out of range for layer {layer!r} with "
                f"{act.shape[0]} channels")
        seed = np.zeros_like(act)
        seed[idx] = 1.0 / act[idx].size
        value = float(act[idx].mean())
    elif kind == "layer":
        seed = np.full_like(act, 1.0 / act.size)
        value = float(act.mean())
    else:
        raise ShapeMismatch(f"unknown maximization target {kind!r}")
    grad = layer_backward(net, x, layer, seed).array
    return value, grad


def maximize_activation(net, cfg):
    """Gradient ascent maximizing a filter/layer/logit activation.

    Each iteration optionally rolls the image by a seeded integer offset,
    takes one step of size learning_rate on (objective - l2_decay * ||x||^2),
    rolls back, and clamps to [0, 1].
    """
    x = _resolve_init(net, cfg)
    rng = np.random.default_rng(cfg.seed)
    trace = OptimizationTrace(snapshots=[] if cfg.snapshot_every else None)
    for it in range(cfg.num_iter):
        value, _ = _activation_objective(net, x, cfg.target)
        trace.objectives.append(value)
        if cfg.jitter:
            dy, dx = rng.integers(-cfg.jitter, cfg.jitter + 1, size=2)
        else:
            dy = dx = 0
        rolled = np.roll(x, (int(dy), int(dx)), axis=(1, 2))
        _, grad = _activation_objective(net, rolled, cfg.target)
        rolled = rolled + np.float32(cfg.learning_rate) * (
            grad - np.float32(2.0 * cfg.l2_decay) * rolled)
        x = np.roll(rolled, (-int(dy), -int(dx)), axis=(1, 2))
        x = np.clip(x, 0.0, 1.0)
        if cfg.snapshot_every and (it + 1) % cfg.snapshot_every == 0:
            trace.snapshots.append((it + 1, Tensor(x)))
    trace.final_image = Tensor(x)
    return trace


def deep_dream(net, image, layer, filter_index, cfg=None, **kw):
    """Activation maximization initialized from a natural image."""
    if cfg is None:
        cfg = OptimizationConfig(target=("filter", layer, filter_index), **kw)
    img = as_array(image)
    if tuple(img.shape) != net.input_shape:
        raise ImageShapeMismatch(
            f"image shape {tuple(img.shape)} != network input {net.input_shape}")
    cfg = OptimizationConfig(
        target=("filter", layer, filter_index),
        num_iter=cfg.num_iter, learning_rate=cfg.learning_rate,
        l2_decay=cfg.l2_decay, tv_weight=cfg.tv_weight,
        alpha_weight=cfg.alpha_weight, jitter=cfg.jitter, seed=cfg.seed,
        init_image=img, snapshot_every=cfg.snapshot_every)
    return maximize_activation(net, cfg)


def invert_features(net, image, layer, cfg=None, **kw):
    """Reconstruct an input whose activation at `layer` matches `image`'s.

    Minimizes ||phi(x) - phi(image)||^2 / ||phi(image)||^2 plus isotropic
    total variation and a sixth-power norm, by fixed-step gradient descent
    from seeded noise (or cfg.init_image).
    """
    if cfg is None:
        cfg = OptimizationConfig.for_inversion(layer, **kw)
    img = as_array(image)
    if tuple(img.shape) != net.input_shape:
        raise ImageShapeMismatch(
            f"image shape {tuple(img.shape)} != network input {net.input_shape}")
    net.layer_index(layer)
    _, _, tape = forward(net, img, record={layer})
    phi_target = tape.activations[layer].array.astype(np.float64)
    norm = float((phi_target ** 2).sum())
    if norm == 0.0:
        raise ZeroTargetActivation(
            f"target activation at {layer!r} is all zeros; "
            "normalized objective undefined")

    x = _resolve_init(net, cfg)
    trace = OptimizationTrace(snapshots=[] if cfg.snapshot_every else None)

    def objective_and_grad(arr):
        _, _, t = forward(net, arr, record={layer})
        phi = t.activations[layer].array.astype(np.float64)
        diff = phi - phi_target
        data_value = float((diff ** 2).sum() / norm)
        seed = (2.0 / norm) * diff
        data_grad = layer_backward(net, arr, layer, seed.astype(np.float32)).array
        value = data_value
        grad = data_grad.astype(np.float64)
        if cfg.tv_weight:
            tv_value, tv_grad = total_variation(arr)
            value += cfg.tv_weight * tv_value
            grad += cfg.tv_weight * tv_grad
        if cfg.alpha_weight:
            x64 = arr.astype(np.float64)
            value += cfg.alpha_weight * float((x64 ** 6).sum())
            grad += cfg.alpha_weight * 6.0 * x64 ** 5
        if cfg.l2_decay:
            x64 = arr.astype(np.float64)
            value += cfg.l2_decay * float((x64 ** 2).sum())
            grad += cfg.l2_decay * 2.0 * x64
        return value, grad.astype(np.float32)

    for it in range(cfg.num_iter):
        value, grad = objective_and_grad(x)
        trace.objectives.append(value)
        x = x - np.float32(cfg.learning_rate) * grad
        x = np.clip(x, 0.0, 1.0)
        if cfg.snapshot_every and (it + 1) % cfg.snapshot_every == 0:
            trace.snapshots.append((it + 1, Tensor(x)))
    trace.final_image = Tensor(x)
    return trace
