"""percept: post-hoc interpretation for small models.

Local explanations (gradient saliency, CAM variants, LIME/SHAP/Anchors/CLE)
and global visualizations (activation maximization, deep dream, feature
inversion) over a self-contained float32 CNN engine with pluggable
black-box predictors for images, text, and tables.
"""

__version__ = "0.1.0"

from .tensor import Tensor
from .network import Network, Tape, backward, forward, gradient_check
from .netio import load_network, save_network

__all__ = [
    "__version__",
    "Tensor", "Network", "Tape", "backward", "forward", "gradient_check",
    "load_network", "save_network",
]
