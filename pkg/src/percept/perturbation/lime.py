"""LIME and its degree-2 interaction variant (CLE).

Both draw one batch of perturbations, query the predictor once, weight the
samples by an exponential kernel over the distance to the instance, and fit
a weighted ridge surrogate to the target label's probability. The
interaction variant augments the design with pairwise feature products and
reports pair weights alongside the singleton projection.
"""

import numpy as np

from ..errors import DegenerateDesign, DesignTooLarge, PredictorFailure
from ..models import as_predict_fn
from .explanation import Explanation
from .surrogate import weighted_r2, weighted_ridge


def _query(predictor, inputs, n_expected):
    fn = as_predict_fn(predictor)
    try:
        probs = np.asarray(fn(inputs), dtype=np.float64)
    except Exception as exc:
        raise PredictorFailure(f"predictor raised {exc!r}") from exc
    if probs.ndim != 2 or probs.shape[0] != n_expected:
        raise PredictorFailure(
            f"predictor returned shape {probs.shape}, expected ({n_expected}, K)")
    return probs


def _kernel_weights(distances, kernel_width):
    return np.exp(-(distances ** 2) / (kernel_width ** 2))


def _top_k(coefs, top_k):
    order = sorted(range(len(coefs)), key=lambda i: (-abs(coefs[i]), i))
    if top_k is not None:
        order = order[:top_k]
    return [(i, float(coefs[i])) for i in order]


def _resolve_labels(label, top_labels, probs_row):
    if label is not None:
        return [int(label)], True
    ranked = np.argsort(-probs_row, kind="stable")
    return [int(c) for c in ranked[:top_labels]], False


def lime_explain(predictor, instance, label=None, n_samples=1000,
                 kernel_width=None, ridge=1.0, top_k=None, seed=0,
                 p_keep=0.5, top_labels=1, class_names=None):
    """Local linear surrogate over interpretable features.

    With `label=None` the `top_labels` highest-probability classes of the
    unperturbed instance are each explained and a list is returned.
    """
    d = instance.d
    if n_samples < d + 2:
        raise DegenerateDesign(
            f"need at least d+2={d + 2} samples to fit {d} features")
    pert = instance.sample(n_samples, seed, p_keep=p_keep)
    if np.all(pert.design == pert.design[0]):
        raise DegenerateDesign("all perturbations are identical")
    probs = _query(predictor, pert.inputs, n_samples)
    kw = kernel_width if kernel_width is not None else instance.kernel_width
    weights = _kernel_weights(pert.distances, kw)

    labels, single = _resolve_labels(label, top_labels, probs[0])
    results = []
    for lab in labels:
        y = probs[:, lab]
        coefs, intercept = weighted_ridge(pert.design, y, weights, ridge)
        fitted = pert.design @ coefs + intercept
        results.append(Explanation(
            method="lime",
            label=lab,
            class_name=class_names[lab] if class_names else None,
            intercept=intercept,
            weights=_top_k(coefs, top_k),
            feature_names=instance.feature_names,
            fit_quality=weighted_r2(y, fitted, weights),
            n_samples=n_samples,
            seed=seed,
        ))
    return results[0] if single else results


def cle_explain(predictor, instance, label=None, n_samples=1000,
                kernel_width=None, ridge=1.0, top_k=None, seed=0,
                p_keep=0.5, top_labels=1, class_names=None):
    """LIME pipeline with pairwise interaction columns z_i * z_j.

    The reported singleton weights are the surrogate's direct linear terms
    (the bar-chart projection); pair weights capture the contextual
    interactions.
    """
    d = instance.d
    n_columns = d * (d + 1) // 2
    if n_columns > n_samples:
        raise DesignTooLarge(
            f"degree-2 design has {n_columns} columns but only "
            f"{n_samples} samples")
    if n_samples < d + 2:
        raise DegenerateDesign(
            f"need at least d+2={d + 2} samples to fit {d} features")
    pert = instance.sample(n_samples, seed, p_keep=p_keep)
    if np.all(pert.design == pert.design[0]):
        raise DegenerateDesign("all perturbations are identical")
    probs = _query(predictor, pert.inputs, n_samples)
    kw = kernel_width if kernel_width is not None else instance.kernel_width
    weights = _kernel_weights(pert.distances, kw)

    pair_index = [(i, j) for i in range(d) for j in range(i + 1, d)]
    pair_cols = np.empty((n_samples, len(pair_index)))
    for col, (i, j) in enumerate(pair_index):
        pair_cols[:, col] = pert.design[:, i] * pert.design[:, j]
    full_design = np.hstack([pert.design, pair_cols])

    labels, single = _resolve_labels(label, top_labels, probs[0])
    results = []
    for lab in labels:
        y = probs[:, lab]
        coefs, intercept = weighted_ridge(full_design, y, weights, ridge)
        fitted = full_design @ coefs + intercept
        singles = coefs[:d]
        pairs = [(i, j, float(coefs[d + c]))
                 for c, (i, j) in enumerate(pair_index)]
        results.append(Explanation(
            method="cle",
            label=lab,
            class_name=class_names[lab] if class_names else None,
            intercept=intercept,
            weights=_top_k(singles, top_k),
            feature_names=instance.feature_names,
            fit_quality=weighted_r2(y, fitted, weights),
            n_samples=n_samples,
            seed=seed,
            pairs=pairs,
        ))
    return results[0] if single else results
