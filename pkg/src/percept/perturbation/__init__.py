from .explanation import AnchorResult, Explanation
from .features import (
    ImageInstance,
    Perturbations,
    SegmentMap,
    TabularInstance,
    TextInstance,
    grid_segment,
    perturb_tabular,
    sample_masks,
)
from .lime import cle_explain, lime_explain
from .shap import exact_shapley_oracle, kernel_shap_explain, shapley_kernel_weight
from .anchors import anchors_explain, estimate_rule_precision, hoeffding_lower_bound

__all__ = [
    "AnchorResult", "Explanation",
    "ImageInstance", "Perturbations", "SegmentMap", "TabularInstance",
    "TextInstance", "grid_segment", "perturb_tabular", "sample_masks",
    "lime_explain", "cle_explain",
    "kernel_shap_explain", "exact_shapley_oracle", "shapley_kernel_weight",
    "anchors_explain", "estimate_rule_precision", "hoeffding_lower_bound",
]
