from .saliency import SaliencyMap, bilinear_upsample, collapse_channels, normalize_map
from .cam import CamRequest, grad_cam, grad_cam_pp, score_cam
from .backprop import (
    vanilla_bp,
    guided_bp,
    smooth_grad,
    integrated_gradients,
)

__all__ = [
    "SaliencyMap", "bilinear_upsample", "collapse_channels", "normalize_map",
    "CamRequest", "grad_cam", "grad_cam_pp", "score_cam",
    "vanilla_bp", "guided_bp", "smooth_grad", "integrated_gradients",
]
