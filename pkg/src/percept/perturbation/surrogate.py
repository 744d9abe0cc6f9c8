"""Small dense weighted least squares used by the surrogate explainers."""

import numpy as np

from ..errors import SingularSystem


def weighted_ridge(design, target, sample_weight, ridge):
    """Fit target ~ design with sample weights and an unpenalized intercept.

    Returns (coefficients, intercept). ridge=0 solves ordinary weighted
    least squares through lstsq, which recovers realizable targets exactly.
    """
    design = np.asarray(design, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    w = np.asarray(sample_weight, dtype=np.float64)
    n, d = design.shape
    x = np.hstack([design, np.ones((n, 1))])
    if ridge > 0:
        xtw = x.T * w
        gram = xtw @ x
        gram[np.arange(d), np.arange(d)] += ridge
        try:
            beta = np.linalg.solve(gram, xtw @ target)
        except np.linalg.LinAlgError as exc:
            raise SingularSystem("ridge normal equations are singular") from exc
    else:
        sw = np.sqrt(w)
        beta, *_ = np.linalg.lstsq(x * sw[:, None], target * sw, rcond=None)
    return beta[:d], float(beta[d])


def weighted_r2(target, predicted, sample_weight):
    """Weighted R^2 against the weighted-mean null model; 0 for flat targets."""
    target = np.asarray(target, dtype=np.float64)
    predicted = np.asarray(predicted, dtype=np.float64)
    w = np.asarray(sample_weight, dtype=np.float64)
    total_w = w.sum()
    if total_w <= 0:
        return 0.0
    mean = float((w * target).sum() / total_w)
    ss_tot = float((w * (target - mean) ** 2).sum())
    if ss_tot <= 1e-12:
        return 0.0
    ss_res = float((w * (target - predicted) ** 2).sum())
    return 1.0 - ss_res / ss_tot
