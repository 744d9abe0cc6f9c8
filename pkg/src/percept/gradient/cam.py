"""Class activation mapping: Grad-CAM, Grad-CAM++, Score-CAM.

All three produce non-negative maps at the target layer's resolution,
bilinearly upsampled to the input size. Channel weights differ per method:
spatial-mean gradients (Grad-CAM), the closed-form second/third-order
weighting computed from powers of the first gradient (Grad-CAM++), or
masked-forward probability shifts (Score-CAM, gradient-free).
"""

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidTarget, NonSpatialLayer
from ..network import backward, forward
from .saliency import SaliencyMap, bilinear_upsample, normalize_map

PP_DENOM_EPS = 1e-12


@dataclass
class CamRequest:
    method: str = "gradcam"
    target_layer: str = "relu2"
    target_class: int = None
    source: str = "logit"  # differentiate the logit (default) or the prob


def _prepare(net, input, req):
    _, probs, tape = forward(net, input, record={req.target_layer})
    activation = tape.activations[req.target_layer].array
    if activation.ndim != 3:
        raise NonSpatialLayer(
            f"layer {req.target_layer!r} has shape {activation.shape}; "
            "CAM needs a spatial (C, H, W) layer")
    target = req.target_class
    if target is None:
        target = int(np.argmax(probs.array))
    if not 0 <= target < net.class_count:
        raise InvalidTarget(f"class {target} out of range")
    return activation, target


def _finish(channel_weights, activation, in_h, in_w, trace):
    raw = np.maximum(np.einsum("k,kij->ij", channel_weights, activation), 0.0)
    up = bilinear_upsample(raw, in_h, in_w)
    up = np.maximum(up, 0.0)  # bilinear interpolation cannot undershoot, belt and braces
    if trace is not None:
        trace["channel_weights"] = [float(v) for v in channel_weights]
    return SaliencyMap(up, signed=False)


def grad_cam(net, input, req, trace=None):
    """Weights are the spatial mean of d(score)/d(activation) per channel."""
    activation, target = _prepare(net, input, req)
    grad = backward(net, input, target, to=req.target_layer,
                    source=req.source).array
    alphas = grad.mean(axis=(1, 2)).astype(np.float32)
    _, in_h, in_w = net.input_shape
    return _finish(alphas, activation, in_h, in_w, trace)


def grad_cam_pp(net, input, req, trace=None):
    """Grad-CAM++ channel weights from first-gradient powers.

    w_ij = g^2 / (2 g^2 + sum(A * g^3)), alpha_k = sum_ij w_ij * relu(g_ij);
    the denominator is guarded at 1e-12.
    """
    activation, target = _prepare(net, input, req)
    grad = backward(net, input, target, to=req.target_layer,
                    source=req.source).array.astype(np.float64)
    act = activation.astype(np.float64)
    g2 = grad ** 2
    g3 = grad ** 3
    denom = 2.0 * g2 + (act * g3).sum(axis=(1, 2), keepdims=True)
    denom = np.where(np.abs(denom) < PP_DENOM_EPS, PP_DENOM_EPS, denom)
    w = g2 / denom
    alphas = (w * np.maximum(grad, 0.0)).sum(axis=(1, 2)).astype(np.float32)
    _, in_h, in_w = net.input_shape
    return _finish(alphas, activation, in_h, in_w, trace)


def score_cam(net, input, req, trace=None):
    """Gradient-free CAM: per-channel masked-forward probability shifts.

    Each channel's activation is min-max normalized ([0,1]; constant
    channels become zeros), upsampled, and multiplied into the input; the
    channel weight is the target-class probability on that masked input
    minus the probability on the all-zero baseline.
    """
    activation, target = _prepare(net, input, req)
    x = np.asarray(input, dtype=np.float32)
    if x.ndim != 3:
        x = x.reshape(net.input_shape)
    _, in_h, in_w = net.input_shape
    zero_input = np.zeros_like(x)
    _, base_probs, _ = forward(net, zero_input)
    base = float(base_probs.array[target])
    weights = np.zeros(activation.shape[0], dtype=np.float32)
    for k in range(activation.shape[0]):  # fixed order keeps results scheduling-free
        mask = normalize_map(activation[k])
        if not mask.any():
            continue
        mask_up = bilinear_upsample(mask, in_h, in_w)
        _, probs, _ = forward(net, x * mask_up[None, :, :])
        weights[k] = float(probs.array[target]) - base
    if trace is not None:
        trace["baseline_prob"] = base
    return _finish(weights, activation, in_h, in_w, trace)
