"""Anchor rules: high-precision predicate conjunctions via beam search.

A candidate rule fixes a set of interpretable features (token present,
segment on, tabular feature in its bin); its precision is the Monte-Carlo
probability that the predictor keeps the instance's label on perturbations
satisfying the rule. Candidates are scored by a Hoeffding lower confidence
bound, which keeps the guarantee distribution-free.
"""

import math

import numpy as np

from ..errors import PredictorFailure
from ..models import as_predict_fn
from .explanation import AnchorResult


def hoeffding_lower_bound(p_hat, n, delta):
    """One-sided lower confidence bound at level 1 - delta."""
    return p_hat - math.sqrt(math.log(1.0 / delta) / (2.0 * n))


def _predict_labels(predictor, inputs, n_expected):
    fn = as_predict_fn(predictor)
    try:
        probs = np.asarray(fn(inputs), dtype=np.float64)
    except Exception as exc:
        raise PredictorFailure(f"predictor raised {exc!r}") from exc
    if probs.ndim != 2 or probs.shape[0] != n_expected:
        raise PredictorFailure(
            f"predictor returned shape {probs.shape}, expected ({n_expected}, K)")
    return np.argmax(probs, axis=1)


def estimate_rule_precision(predictor, instance, rule, label, n, seed):
    """Precision of `rule` on n fresh perturbations drawn with `seed`."""
    pert = instance.sample(n, seed, fixed=tuple(sorted(rule)))
    labels = _predict_labels(predictor, pert.inputs, n)
    return float(np.mean(labels == label))


def anchors_explain(predictor, instance, label=None, tau=0.95, delta=0.05,
                    beam_width=4, max_predicates=4, n_samples=1000,
                    coverage_samples=1000, seed=0, class_names=None):
    """Beam search for the shortest rule whose precision LCB reaches tau.

    If no rule reaches the target within `max_predicates` predicates, the
    best rule found is returned with ``achieved_target=False``.
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must be in (0, 1)")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1)")
    rng = np.random.default_rng(seed)
    samples_used = 0

    if label is None:
        original = instance.sample(1, seed)  # row 0 is the instance itself
        label = int(_predict_labels(predictor, original.inputs, 1)[0])

    def evaluate(rule):
        nonlocal samples_used
        child_seed = int(rng.integers(0, 2 ** 62))
        precision = estimate_rule_precision(
            predictor, instance, rule, label, n_samples, child_seed)
        samples_used += n_samples
        return precision, hoeffding_lower_bound(precision, n_samples, delta)

    scored = {}  # frozenset rule -> (precision, lcb)
    empty = frozenset()
    scored[empty] = evaluate(empty)
    best_rule = empty

    beam = [empty]
    found = None
    if scored[empty][1] >= tau:
        found = empty
    rounds = 0
    while found is None and rounds < max_predicates:
        rounds += 1
        candidates = []
        for rule in beam:
            for feature in range(instance.d):
                if feature in rule:
                    continue
                extended = frozenset(rule | {feature})
                if extended in scored:
                    continue
                scored[extended] = evaluate(extended)
                candidates.append(extended)
        if not candidates:
            break
        candidates.sort(key=lambda r: (-scored[r][1], sorted(r)))
        if scored[candidates[0]][1] > scored[best_rule][1]:
            best_rule = candidates[0]
        if scored[candidates[0]][1] >= tau:
            found = candidates[0]
            break
        beam = candidates[:beam_width]

    rule = found if found is not None else best_rule
    precision, lcb = scored[rule]

    coverage_seed = int(rng.integers(0, 2 ** 62))
    cov = instance.sample(coverage_samples, coverage_seed)
    samples_used += coverage_samples
    if rule:
        satisfied = np.all(cov.binary[:, sorted(rule)] == 1.0, axis=1)
        coverage = float(np.mean(satisfied))
    else:
        coverage = 1.0

    predicates = [(f, instance.predicate_name(f)) for f in sorted(rule)]
    return AnchorResult(
        predicates=predicates,
        precision_estimate=precision,
        coverage_estimate=coverage,
        samples_used=samples_used,
        lower_bound=lcb,
        achieved_target=found is not None,
        label=label,
        class_name=class_names[label] if class_names else None,
        seed=seed,
    )
