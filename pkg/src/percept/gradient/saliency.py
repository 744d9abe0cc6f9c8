"""Saliency map value type and the shared resampling/collapse helpers."""

from dataclasses import dataclass

import numpy as np

from ..errors import NonFiniteValue, ShapeMismatch


@dataclass
class SaliencyMap:
    """H x W attribution grid.

    ``signed=False`` marks the CAM family, whose maps are guaranteed
    elementwise non-negative.
    """

    values: np.ndarray
    signed: bool = True

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise ShapeMismatch(f"saliency map must be 2-D, got {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteValue("saliency map contains non-finite values")
        if not self.signed and self.values.min() < 0:
            raise NonFiniteValue("non-negative map has negative entries")

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]


def bilinear_upsample(values, out_h, out_w):
    """Corner-aligned bilinear resampling.

    Written in incremental form (base + weighted differences) so constant
    maps, including the zero map, are reproduced exactly.
    """
    values = np.asarray(values, dtype=np.float32)
    h, w = values.shape
    if (h, w) == (out_h, out_w):
        return values.copy()
    ys = (np.arange(out_h, dtype=np.float64) * (h - 1) / (out_h - 1)
          if out_h > 1 else np.zeros(1))
    xs = (np.arange(out_w, dtype=np.float64) * (w - 1) / (out_w - 1)
          if out_w > 1 else np.zeros(1))
    y0 = np.minimum(ys.astype(np.int64), h - 1)
    x0 = np.minimum(xs.astype(np.int64), w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0).astype(np.float32)[:, None]
    fx = (xs - x0).astype(np.float32)[None, :]
    v00 = values[np.ix_(y0, x0)]
    v01 = values[np.ix_(y0, x1)]
    v10 = values[np.ix_(y1, x0)]
    v11 = values[np.ix_(y1, x1)]
    out = v00 + fx * (v01 - v00) + fy * (v10 - v00) + fy * fx * (v11 - v01 - v10 + v00)
    return out.astype(np.float32)


def collapse_channels(grad):
    """Collapse a (C, H, W) gradient to H x W: max over channels of |value|."""
    grad = np.asarray(grad)
    if grad.ndim == 2:
        return np.abs(grad).astype(np.float32)
    return np.abs(grad).max(axis=0).astype(np.float32)


def normalize_map(values):
    """Min-max normalize to [0, 1]; all-equal maps become all-zeros."""
    values = np.asarray(values, dtype=np.float32)
    lo = float(values.min())
    hi = float(values.max())
    if hi <= lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)
