"""Dense float32 tensor value type.

Every value entering or leaving the engine is a finite 32-bit float; any
NaN/Inf aborts the computation instead of propagating.
"""

import numpy as np

from .errors import NonFiniteValue


def ensure_finite(array, where=""):
    """Raise NonFiniteValue if `array` contains NaN or Inf."""
    if not np.all(np.isfinite(array)):
        ctx = f" in {where}" if where else ""
        raise NonFiniteValue(f"non-finite value produced{ctx}")
    return array


class Tensor:
    """Row-major multi-dimensional array of finite 32-bit floats."""

    __slots__ = ("array",)

    def __init__(self, values):
        arr = np.ascontiguousarray(values, dtype=np.float32)
        ensure_finite(arr, "Tensor construction")
        self.array = arr

    @property
    def shape(self):
        return tuple(self.array.shape)

    @property
    def data(self):
        """Flat row-major view of the elements."""
        return self.array.reshape(-1)

    def __array__(self, dtype=None):
        return self.array if dtype is None else self.array.astype(dtype)

    def __len__(self):
        return self.array.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.array, other.array)

    def __repr__(self):
        return f"Tensor(shape={self.shape})"


def as_array(values, dtype=np.float32):
    """Coerce a Tensor or array-like to a contiguous ndarray of `dtype`."""
    if isinstance(values, Tensor):
        return values.array.astype(dtype, copy=False)
    return np.ascontiguousarray(values, dtype=dtype)
