"""Kernel SHAP and the permutation-based exact Shapley oracle.

Kernel SHAP treats features as players in a coalition game over the
instance's interpretable space: coalition z is weighted by
pi(z) = (d-1) / (C(d,|z|) * |z| * (d-|z|)) for interior sizes, while the
empty and full coalitions enter as the equality constraints phi_0 = f(empty)
and sum(phi) + phi_0 = f(x). Exact mode enumerates all 2^d coalitions and
reproduces Shapley values to solver precision.
"""

import itertools
import math

import numpy as np

from ..errors import PredictorFailure, SingularSystem, TooManyFeaturesForExact
from ..models import as_predict_fn
from .explanation import Explanation
from .surrogate import weighted_r2

EXACT_LIMIT = 14
ORACLE_LIMIT = 10


def shapley_kernel_weight(d, size):
    """pi(z) for an interior coalition of the given size."""
    return (d - 1) / (math.comb(d, size) * size * (d - size))


def _build_inputs(instance, masks):
    rebuilt = [instance.reconstruct(m) for m in masks]
    if isinstance(rebuilt[0], str):
        return rebuilt
    return np.stack(rebuilt)


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


def _solve_constrained(masks, values, kernel_weights, f_empty, f_full):
    """Weighted least squares with both boundary constraints eliminated."""
    d = masks.shape[1]
    delta = f_full - f_empty
    if d == 1:
        return np.array([delta])
    z_last = masks[:, d - 1]
    x = masks[:, :d - 1] - z_last[:, None]
    y = values - f_empty - z_last * delta
    xtw = x.T * kernel_weights
    gram = xtw @ x
    try:
        head = np.linalg.solve(gram, xtw @ y)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(
            "coalition design is singular; draw more samples") from exc
    return np.append(head, delta - head.sum())


def kernel_shap_explain(predictor, instance, label=None, n_samples=2048,
                        exact=False, baseline=None, seed=0, class_names=None):
    """Shapley-value attribution via the weighted regression formulation.

    One batched predictor call covers every coalition plus the baseline.
    `baseline` optionally overrides the instance's feature-off values
    (tabular instances only).
    """
    if baseline is not None:
        instance = type(instance)(instance.row, instance.dataset,
                                  discretize=instance.discretize,
                                  baseline=baseline)
    d = instance.d
    if exact:
        if d > EXACT_LIMIT:
            raise TooManyFeaturesForExact(
                f"exact mode enumerates 2^d coalitions; d={d} > {EXACT_LIMIT}")
        masks = np.zeros((2 ** d, d))
        for idx in range(2 ** d):
            for f in range(d):
                if idx >> f & 1:
                    masks[idx, f] = 1.0
        sizes = masks.sum(axis=1)
        interior = (sizes > 0) & (sizes < d)
        kernel = np.array([
            shapley_kernel_weight(d, int(s)) if 0 < s < d else 0.0
            for s in sizes])
        n_total = masks.shape[0]
    else:
        rng = np.random.default_rng(seed)
        size_probs = np.array([(d - 1) / (s * (d - s)) if 0 < s < d else 0.0
                               for s in range(d + 1)])
        if size_probs.sum() == 0:  # d == 1: no interior sizes exist
            masks = np.zeros((0, d))
        else:
            size_probs = size_probs / size_probs.sum()
            drawn_sizes = rng.choice(d + 1, size=n_samples, p=size_probs)
            masks = np.zeros((n_samples, d))
            for i, s in enumerate(drawn_sizes):
                masks[i, rng.choice(d, size=int(s), replace=False)] = 1.0
        # sampling follows the kernel over sizes, so rows get unit weight
        kernel = np.ones(masks.shape[0])
        interior = np.ones(masks.shape[0], dtype=bool)
        masks = np.vstack([masks, np.zeros((1, d)), np.ones((1, d))])
        kernel = np.append(kernel, [0.0, 0.0])
        interior = np.append(interior, [False, False])
        n_total = masks.shape[0]

    inputs = _build_inputs(instance, masks)
    probs = _query(predictor, inputs, n_total)
    full_row = int(np.argwhere(masks.sum(axis=1) == d)[0][0])
    empty_row = int(np.argwhere(masks.sum(axis=1) == 0)[0][0])
    if label is None:
        label = int(np.argmax(probs[full_row]))
    values = probs[:, label]
    f_empty = float(values[empty_row])
    f_full = float(values[full_row])

    phi = _solve_constrained(masks[interior], values[interior],
                             kernel[interior], f_empty, f_full)
    if interior.any():
        fitted = masks[interior] @ phi + f_empty
        quality = weighted_r2(values[interior], fitted, kernel[interior])
    else:
        quality = 1.0  # single feature: the game is fit exactly

    order = sorted(range(d), key=lambda i: (-abs(phi[i]), i))
    return Explanation(
        method="shap",
        label=int(label),
        class_name=class_names[label] if class_names else None,
        intercept=f_empty,
        weights=[(i, float(phi[i])) for i in order],
        feature_names=instance.feature_names,
        fit_quality=quality,
        n_samples=n_total,
        seed=seed,
    )


def exact_shapley_oracle(set_function, d):
    """Exact Shapley values by the subset-weighted marginal-contribution sum.

    Equivalent to averaging marginal contributions over all d! orderings;
    `set_function` maps a length-d 0/1 array to a scalar.
    """
    if d > ORACLE_LIMIT:
        raise TooManyFeaturesForExact(
            f"oracle enumerates all subsets; d={d} > {ORACLE_LIMIT}")
    values = {}
    for bits in itertools.product((0, 1), repeat=d):
        values[bits] = float(set_function(np.array(bits, dtype=np.float64)))
    fact = [math.factorial(i) for i in range(d + 1)]
    phi = np.zeros(d)
    for bits, v in values.items():
        size = sum(bits)
        for i in range(d):
            if bits[i]:
                continue
            with_i = list(bits)
            with_i[i] = 1
            weight = fact[size] * fact[d - size - 1] / fact[d]
            phi[i] += weight * (values[tuple(with_i)] - v)
    return phi
