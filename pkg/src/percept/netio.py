"""Binary weight-file codec for Network values.

Layout (little-endian): magic "PCPT", u32 version=1, u32 input channels,
height, width, u32 class count, u32 layer count; then per layer a u16 name
length, the UTF-8 name, a u8 kind tag, kind-specific u32 shape fields, and
the f32 weight payload in row-major order. Round-trips are bit-exact.
"""

import struct

import numpy as np

from .errors import FormatError, UnsupportedVersion
from .layers import Conv2d, Dense, Flatten, MaxPool2d, ReLU, Softmax
from .network import Network

MAGIC = b"PCPT"
VERSION = 1

_KIND_TAGS = {
    "conv2d": 1,
    "relu": 2,
    "maxpool2d": 3,
    "flatten": 4,
    "dense": 5,
    "softmax": 6,
}
_TAG_KINDS = {v: k for k, v in _KIND_TAGS.items()}


class _Reader:
    def __init__(self, blob):
        self.blob = blob
        self.pos = 0

    def take(self, n, what):
        if self.pos + n > len(self.blob):
            raise FormatError(f"truncated file while reading {what}", self.pos)
        chunk = self.blob[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u8(self, what):
        return self.take(1, what)[0]

    def u16(self, what):
        return struct.unpack("<H", self.take(2, what))[0]

    def u32(self, what):
        return struct.unpack("<I", self.take(4, what))[0]

    def f32_array(self, count, what):
        raw = self.take(4 * count, what)
        return np.frombuffer(raw, dtype="<f4", count=count).astype(np.float32)


def save_network(net, path):
    """Write `net` to `path` in the PCPT container format."""
    parts = [MAGIC, struct.pack("<I", VERSION)]
    c, h, w = net.input_shape
    parts.append(struct.pack("<IIII", c, h, w, net.class_count))
    parts.append(struct.pack("<I", len(net.layers)))
    for layer in net.layers:
        name = layer.name.encode("utf-8")
        parts.append(struct.pack("<H", len(name)))
        parts.append(name)
        parts.append(struct.pack("<B", _KIND_TAGS[layer.kind]))
        if layer.kind == "conv2d":
            oc, ic, kh, kw = layer.weight.shape
            parts.append(struct.pack("<IIIIII", oc, ic, kh, kw,
                                     layer.stride, layer.padding))
            parts.append(layer.weight.astype("<f4").tobytes())
            parts.append(layer.bias.astype("<f4").tobytes())
        elif layer.kind == "maxpool2d":
            parts.append(struct.pack("<II", layer.kernel, layer.stride))
        elif layer.kind == "dense":
            out_n, in_n = layer.weight.shape
            parts.append(struct.pack("<II", out_n, in_n))
            parts.append(layer.weight.astype("<f4").tobytes())
            parts.append(layer.bias.astype("<f4").tobytes())
        # relu / flatten / softmax carry no parameters
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def load_network(path):
    """Read a PCPT weight file back into a Network."""
    with open(path, "rb") as fh:
        blob = fh.read()
    r = _Reader(blob)
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}", 0)
    version = r.u32("version")
    if version != VERSION:
        raise UnsupportedVersion(f"unsupported weight file version {version}")
    c = r.u32("input channels")
    h = r.u32("input height")
    w = r.u32("input width")
    k = r.u32("class count")
    layer_count = r.u32("layer count")
    layers = []
    for _ in range(layer_count):
        name_len = r.u16("layer name length")
        name = r.take(name_len, "layer name").decode("utf-8")
        tag = r.u8("layer kind tag")
        kind = _TAG_KINDS.get(tag)
        if kind is None:
            raise FormatError(f"unknown layer kind tag {tag}", r.pos - 1)
        if kind == "conv2d":
            oc = r.u32("conv out channels")
            ic = r.u32("conv in channels")
            kh = r.u32("conv kernel height")
            kw = r.u32("conv kernel width")
            stride = r.u32("conv stride")
            padding = r.u32("conv padding")
            weight = r.f32_array(oc * ic * kh * kw, "conv weights")
            bias = r.f32_array(oc, "conv bias")
            layers.append(Conv2d(name, weight.reshape(oc, ic, kh, kw), bias,
                                 stride=stride, padding=padding))
        elif kind == "relu":
            layers.append(ReLU(name))
        elif kind == "maxpool2d":
            kernel = r.u32("pool kernel")
            stride = r.u32("pool stride")
            layers.append(MaxPool2d(name, kernel=kernel, stride=stride))
        elif kind == "flatten":
            layers.append(Flatten(name))
        elif kind == "dense":
            out_n = r.u32("dense outputs")
            in_n = r.u32("dense inputs")
            weight = r.f32_array(out_n * in_n, "dense weights")
            bias = r.f32_array(out_n, "dense bias")
            layers.append(Dense(name, weight.reshape(out_n, in_n), bias))
        elif kind == "softmax":
            layers.append(Softmax(name))
    if r.pos != len(blob):
        raise FormatError("trailing bytes after final layer", r.pos)
    return Network(layers, (c, h, w), k)
