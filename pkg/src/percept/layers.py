"""Layer kinds for the sequential CNN engine.

Each layer knows its output shape, a forward pass, and a backward pass that
maps the gradient at its output to the gradient at its input. Forward and
backward are pure; the backward of a layer receives the same input array the
forward saw. All layers run in the dtype of their input so the float64
finite-difference oracle can reuse the same code path.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch

RULE_STANDARD = "standard"
RULE_GUIDED = "guided"


def _freeze(arr):
    a = np.ascontiguousarray(arr, dtype=np.float32)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Conv2d:
    name: str
    weight: np.ndarray  # (out_c, in_c, kh, kw)
    bias: np.ndarray  # (out_c,)
    stride: int = 1
    padding: int = 0
    kind = "conv2d"

    def __post_init__(self):
        if self.weight.ndim != 4:
            raise ShapeMismatch(f"{self.name}: conv weight must be 4-D")
        if self.bias.shape != (self.weight.shape[0],):
            raise ShapeMismatch(f"{self.name}: bias shape {self.bias.shape} "
                                f"does not match {self.weight.shape[0]} output channels")
        object.__setattr__(self, "weight", _freeze(self.weight))
        object.__setattr__(self, "bias", _freeze(self.bias))

    def out_shape(self, in_shape):
        c, h, w = in_shape
        oc, ic, kh, kw = self.weight.shape
        if c != ic:
            raise ShapeMismatch(f"{self.name}: expected {ic} input channels, got {c}")
        oh = (h + 2 * self.padding - kh) // self.stride + 1
        ow = (w + 2 * self.padding - kw) // self.stride + 1
        if oh < 1 or ow < 1:
            raise ShapeMismatch(f"{self.name}: kernel larger than padded input")
        return (oc, oh, ow)

    def _im2col(self, x):
        c, h, w = x.shape
        _, _, kh, kw = self.weight.shape
        p, s = self.padding, self.stride
        if p:
            xp = np.zeros((c, h + 2 * p, w + 2 * p), dtype=x.dtype)
            xp[:, p:p + h, p:p + w] = x
        else:
            xp = x
        oh = (h + 2 * p - kh) // s + 1
        ow = (w + 2 * p - kw) // s + 1
        cols = np.empty((c, kh, kw, oh, ow), dtype=x.dtype)
        for i in range(kh):
            for j in range(kw):
                cols[:, i, j] = xp[:, i:i + oh * s:s, j:j + ow * s:s]
        return cols.reshape(c * kh * kw, oh * ow), oh, ow

    def forward(self, x):
        oc = self.weight.shape[0]
        cols, oh, ow = self._im2col(x)
        w2 = self.weight.reshape(oc, -1).astype(x.dtype)
        out = w2 @ cols + self.bias.astype(x.dtype)[:, None]
        return out.reshape(oc, oh, ow)

    def backward(self, x, grad_out, rule=RULE_STANDARD):
        oc, ic, kh, kw = self.weight.shape
        c, h, w = x.shape
        p, s = self.padding, self.stride
        oh, ow = grad_out.shape[1:]
        w2 = self.weight.reshape(oc, -1).astype(x.dtype)
        cols_grad = w2.T @ grad_out.reshape(oc, -1)
        cols_grad = cols_grad.reshape(c, kh, kw, oh, ow)
        xp_grad = np.zeros((c, h + 2 * p, w + 2 * p), dtype=x.dtype)
        for i in range(kh):
            for j in range(kw):
                xp_grad[:, i:i + oh * s:s, j:j + ow * s:s] += cols_grad[:, i, j]
        if p:
            return xp_grad[:, p:p + h, p:p + w]
        return xp_grad


@dataclass(frozen=True)
class ReLU:
    name: str
    kind = "relu"

    def out_shape(self, in_shape):
        return tuple(in_shape)

    def forward(self, x):
        return np.maximum(x, 0)

    def backward(self, x, grad_out, rule=RULE_STANDARD):
        mask = x > 0
        if rule == RULE_GUIDED:
            mask = mask & (grad_out > 0)
        return np.where(mask, grad_out, 0).astype(x.dtype)


@dataclass(frozen=True)
class MaxPool2d:
    name: str
    kernel: int = 2
    stride: int = 2
    kind = "maxpool2d"

    def out_shape(self, in_shape):
        c, h, w = in_shape
        if h < self.kernel or w < self.kernel:
            raise ShapeMismatch(f"{self.name}: pool window larger than input")
        oh = (h - self.kernel) // self.stride + 1
        ow = (w - self.kernel) // self.stride + 1
        return (c, oh, ow)

    def forward(self, x):
        c, oh, ow = self.out_shape(x.shape)
        k, s = self.kernel, self.stride
        out = np.empty((c, oh, ow), dtype=x.dtype)
        for i in range(oh):
            for j in range(ow):
                window = x[:, i * s:i * s + k, j * s:j * s + k].reshape(c, -1)
                out[:, i, j] = window.max(axis=1)
        return out

    def backward(self, x, grad_out, rule=RULE_STANDARD):
        c, oh, ow = grad_out.shape
        k, s = self.kernel, self.stride
        grad_in = np.zeros_like(x)
        chans = np.arange(c)
        for i in range(oh):
            for j in range(ow):
                window = x[:, i * s:i * s + k, j * s:j * s + k].reshape(c, -1)
                # argmax picks the first maximal element in row-major order
                idx = window.argmax(axis=1)
                grad_in[chans, i * s + idx // k, j * s + idx % k] += grad_out[:, i, j]
        return grad_in


@dataclass(frozen=True)
class Flatten:
    name: str
    kind = "flatten"

    def out_shape(self, in_shape):
        n = 1
        for d in in_shape:
            n *= d
        return (n,)

    def forward(self, x):
        return x.reshape(-1)

    def backward(self, x, grad_out, rule=RULE_STANDARD):
        return grad_out.reshape(x.shape)


@dataclass(frozen=True)
class Dense:
    name: str
    weight: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    kind = "dense"

    def __post_init__(self):
        if self.weight.ndim != 2:
            raise ShapeMismatch(f"{self.name}: dense weight must be 2-D")
        if self.bias.shape != (self.weight.shape[0],):
            raise ShapeMismatch(f"{self.name}: bias shape {self.bias.shape} "
                                f"does not match {self.weight.shape[0]} outputs")
        object.__setattr__(self, "weight", _freeze(self.weight))
        object.__setattr__(self, "bias", _freeze(self.bias))

    def out_shape(self, in_shape):
        if len(in_shape) != 1 or in_shape[0] != self.weight.shape[1]:
            raise ShapeMismatch(f"{self.name}: expected input of shape "
                                f"({self.weight.shape[1]},), got {tuple(in_shape)}")
        return (self.weight.shape[0],)

    def forward(self, x):
        return self.weight.astype(x.dtype) @ x + self.bias.astype(x.dtype)

    def backward(self, x, grad_out, rule=RULE_STANDARD):
        return self.weight.astype(x.dtype).T @ grad_out


@dataclass(frozen=True)
class Softmax:
    name: str
    kind = "softmax"

    def out_shape(self, in_shape):
        return tuple(in_shape)

    def forward(self, x):
        z = x - x.max()
        e = np.exp(z)
        return e / e.sum()

    def backward(self, x, grad_out, rule=RULE_STANDARD):
        p = self.forward(x)
        return p * (grad_out - np.dot(grad_out, p))


LAYER_KINDS = {
    cls.kind: cls for cls in (Conv2d, ReLU, MaxPool2d, Flatten, Dense, Softmax)
}
