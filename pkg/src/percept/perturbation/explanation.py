"""Result types for perturbation explainers."""

import math
from dataclasses import dataclass, field


@dataclass
class Explanation:
    """Signed per-feature weights from a local surrogate fit."""

    method: str
    label: int
    class_name: str = None
    intercept: float = 0.0
    weights: list = field(default_factory=list)  # [(feature id, weight)]
    feature_names: list = field(default_factory=list)
    fit_quality: float = 0.0  # weighted R^2 of the surrogate
    n_samples: int = 0
    seed: int = 0
    pairs: list = None  # [(i, j, weight)] for interaction surrogates

    def __post_init__(self):
        if not math.isfinite(self.fit_quality):
            raise ValueError("fit_quality must be finite")

    def name_of(self, feature_id):
        if 0 <= feature_id < len(self.feature_names):
            return self.feature_names[feature_id]
        return f"feature_{feature_id}"

    def to_dict(self):
        payload = {
            "method": self.method,
            "label": int(self.label),
            "class_name": self.class_name,
            "intercept": float(self.intercept),
            "weights": [
                {"feature": int(f), "name": self.name_of(f), "weight": float(w)}
                for f, w in self.weights
            ],
            "fit_quality": float(self.fit_quality),
            "n_samples": int(self.n_samples),
            "seed": int(self.seed),
        }
        if self.pairs is not None:
            payload["pairs"] = [
                {"i": int(i), "j": int(j), "weight": float(w)}
                for i, j, w in self.pairs
            ]
        return payload


@dataclass
class AnchorResult:
    """A predicate rule with estimated precision and coverage."""

    predicates: list  # [(feature id, human-readable condition)]
    precision_estimate: float
    coverage_estimate: float
    samples_used: int
    lower_bound: float
    achieved_target: bool
    label: int
    class_name: str = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.precision_estimate <= 1.0:
            raise ValueError("precision estimate must lie in [0, 1]")
        if not 0.0 <= self.coverage_estimate <= 1.0:
            raise ValueError("coverage estimate must lie in [0, 1]")
        ids = [f for f, _ in self.predicates]
        if len(set(ids)) != len(ids):
            raise ValueError("anchor predicates must reference distinct features")

    def to_dict(self):
        return {
            "method": "anchor",
            "label": int(self.label),
            "class_name": self.class_name,
            "predicates": [
                {"feature": int(f), "condition": c} for f, c in self.predicates
            ],
            "precision": float(self.precision_estimate),
            "coverage": float(self.coverage_estimate),
            "lower_bound": float(self.lower_bound),
            "achieved_target": bool(self.achieved_target),
            "samples_used": int(self.samples_used),
            "seed": int(self.seed),
        }
