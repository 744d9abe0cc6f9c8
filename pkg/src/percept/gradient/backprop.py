"""Input-gradient saliency: vanilla/guided backprop, SmoothGrad, IG.

Maps collapse the (C, H, W) input gradient to H x W by taking the maximum
absolute value over channels; the raw signed gradient or attribution stays
available through the optional trace dict.
"""

import numpy as np

from ..errors import ShapeMismatch
from ..layers import RULE_GUIDED, RULE_STANDARD
from ..network import backward, forward
from ..tensor import as_array
from .saliency import SaliencyMap, collapse_channels


def vanilla_bp(net, input, target, source="logit", trace=None):
    grad = backward(net, input, target, to="input", rule=RULE_STANDARD,
                    source=source).array
    if trace is not None:
        trace["raw_gradient"] = grad
    return SaliencyMap(collapse_channels(grad), signed=True)


def guided_bp(net, input, target, source="logit", trace=None):
    """Vanilla backprop under the guided ReLU rule.

    ReLU layers pass gradient only where the forward input and the incoming
    gradient are both positive, so the result's support is contained in the
    vanilla map's support.
    """
    grad = backward(net, input, target, to="input", rule=RULE_GUIDED,
                    source=source).array
    if trace is not None:
        trace["raw_gradient"] = grad
    return SaliencyMap(collapse_channels(grad), signed=True)


def smooth_grad(net, input, target, n=50, sigma=0.15, seed=0, source="logit",
                trace=None):
    """Mean vanilla gradient over seeded Gaussian-noised copies of the input.

    The noise standard deviation is sigma times the input's value range.
    n=1 with sigma=0 reproduces the vanilla gradient bit for bit.
    """
    if n < 1:
        raise ShapeMismatch("smooth_grad needs n >= 1")
    if sigma < 0:
        raise ShapeMismatch("sigma must be >= 0")
    x = as_array(input)
    spread = float(x.max() - x.min())
    scale = sigma * spread
    rng = np.random.default_rng(seed)
    if n == 1 and sigma == 0.0:
        total = backward(net, x, target, source=source).array
        mean = total
    else:
        acc = np.zeros(x.shape, dtype=np.float32)
        for _ in range(n):
            noisy = x if scale == 0.0 else (
                x + rng.normal(0.0, scale, size=x.shape).astype(np.float32))
            acc += backward(net, noisy, target, source=source).array
        mean = acc / np.float32(n)
    if trace is not None:
        trace["raw_gradient"] = mean
    return SaliencyMap(collapse_channels(mean), signed=True)


def integrated_gradients(net, input, target, baseline=None, steps=64,
                         source="logit", trace=None):
    """Midpoint-rule path integral of gradients from baseline to input.

    attribution = (x - baseline) * mean_t grad(baseline + (t-0.5)/m * (x-b)).
    The attribution sum approximates f(x) - f(baseline) (completeness).
    """
    x = as_array(input)
    if baseline is None:
        baseline = np.zeros_like(x)
    else:
        baseline = as_array(baseline)
    if baseline.shape != x.shape:
        raise ShapeMismatch(
            f"baseline shape {baseline.shape} != input shape {x.shape}")
    if steps < 1:
        raise ShapeMismatch("integrated_gradients needs steps >= 1")
    delta = (x - baseline).astype(np.float64)
    acc = np.zeros(x.shape, dtype=np.float64)
    partials = [] if trace is not None else None
    for t in range(1, steps + 1):
        point = baseline + np.float32((t - 0.5) / steps) * (x - baseline)
        acc += backward(net, point, target, source=source).array
        if partials is not None:
            partials.append(float((delta * acc / t).sum()))
    attribution = delta * (acc / steps)
    if trace is not None:
        trace["raw_attribution"] = attribution.astype(np.float32)
        trace["partial_sums"] = partials
    return SaliencyMap(collapse_channels(attribution), signed=True)
