"""Rasterized visualization: colormaps, overlays, signed bar charts.

Everything renders into plain numpy RGB arrays written as PGM/PPM, with a
built-in 5x7 bitmap font, so identical inputs produce byte-identical files
on every run.
"""

from dataclasses import dataclass

import numpy as np

from .errors import SizeMismatch
from .gradient.saliency import bilinear_upsample, normalize_map
from .imageio import write_image
from .tensor import as_array

GREEN = np.array([0.13, 0.67, 0.13], dtype=np.float32)
RED = np.array([0.78, 0.10, 0.10], dtype=np.float32)
INK = np.array([0.12, 0.12, 0.12], dtype=np.float32)
PAPER = np.array([0.97, 0.97, 0.97], dtype=np.float32)

_FONT = {
    "A": (".XXX.", "X...X", "X...X", "XXXXX", "X...X", "X...X", "....."),
    "B": ("XXXX.", "X...X", "XXXX.", "X...X", "X...X", "XXXX.", "....."),
    "C": (".XXXX", "X....", "X....", "X....", "X....", ".XXXX", "....."),
    "D": ("XXXX.", "X...X", "X...X", "X...X", "X...X", "XXXX.", "....."),
    "E": ("XXXXX", "X....", "XXXX.", "X....", "X....", "XXXXX", "....."),
    "F": ("XXXXX", "X....", "XXXX.", "X....", "X....", "X....", "....."),
    "G": (".XXXX", "X....", "X..XX", "X...X", "X...X", ".XXX.", "....."),
    "H": ("X...X", "X...X", "XXXXX", "X...X", "X...X", "X...X", "....."),
    "I": ("XXXXX", "..X..", "..X..", "..X..", "..X..", "XXXXX", "....."),
    "J": ("....X", "....X", "....X", "....X", "X...X", ".XXX.", "....."),
    "K": ("X...X", "X..X.", "XXX..", "X..X.", "X...X", "X...X", "....."),
    "L": ("X....", "X....", "X....", "X....", "X....", "XXXXX", "....."),
    "M": ("X...X", "XX.XX", "X.X.X", "X...X", "X...X", "X...X", "....."),
    "N": ("X...X", "XX..X", "X.X.X", "X..XX", "X...X", "X...X", "....."),
    "O": (".XXX.", "X...X", "X...X", "X...X", "X...X", ".XXX.", "....."),
    "P": ("XXXX.", "X...X", "XXXX.", "X....", "X....", "X....", "....."),
    "Q": (".XXX.", "X...X", "X...X", "X.X.X", "X..X.", ".XX.X", "....."),
    "R": ("XXXX.", "X...X", "XXXX.", "X..X.", "X...X", "X...X", "....."),
    "S": (".XXXX", "X....", ".XXX.", "....X", "....X", "XXXX.", "....."),
    "T": ("XXXXX", "..X..", "..X..", "..X..", "..X..", "..X..", "....."),
    "U": ("X...X", "X...X", "X...X", "X...X", "X...X", ".XXX.", "....."),
    "V": ("X...X", "X...X", "X...X", "X...X", ".X.X.", "..X..", "....."),
    "W": ("X...X", "X...X", "X...X", "X.X.X", "XX.XX", "X...X", "....."),
    "X": ("X...X", ".X.X.", "..X..", ".X.X.", "X...X", "X...X", "....."),
    "Y": ("X...X", ".X.X.", "..X..", "..X..", "..X..", "..X..", "....."),
    "Z": ("XXXXX", "...X.", "..X..", ".X...", "X....", "XXXXX", "....."),
    "0": (".XXX.", "X...X", "X..XX", "X.X.X", "XX..X", ".XXX.", "....."),
    "1": ("..X..", ".XX..", "..X..", "..X..", "..X..", "XXXXX", "....."),
    "2": (".XXX.", "X...X", "...X.", "..X..", ".X...", "XXXXX", "....."),
    "3": ("XXXX.", "....X", ".XXX.", "....X", "....X", "XXXX.", "....."),
    "4": ("X...X", "X...X", "XXXXX", "....X", "....X", "....X", "....."),
    "5": ("XXXXX", "X....", "XXXX.", "....X", "....X", "XXXX.", "....."),
    "6": (".XXXX", "X....", "XXXX.", "X...X", "X...X", ".XXX.", "....."),
    "7": ("XXXXX", "....X", "...X.", "..X..", ".X...", ".X...", "....."),
    "8": (".XXX.", "X...X", ".XXX.", "X...X", "X...X", ".XXX.", "....."),
    "9": (".XXX.", "X...X", ".XXXX", "....X", "....X", "XXXX.", "....."),
    " ": (".....", ".....", ".....", ".....", ".....", ".....", "....."),
    "_": (".....", ".....", ".....", ".....", ".....", ".....", "XXXXX"),
    "-": (".....", ".....", ".....", "XXXXX", ".....", ".....", "....."),
    "+": (".....", "..X..", "..X..", "XXXXX", "..X..", "..X..", "....."),
    "=": (".....", ".....", "XXXXX", ".....", "XXXXX", ".....", "....."),
    "<": ("...X.", "..X..", ".X...", "X....", ".X...", "..X..", "...X."),
    ">": (".X...", "..X..", "...X.", "....X", "...X.", "..X..", ".X..."),
    ".": (".....", ".....", ".....", ".....", ".....", ".XX..", ".XX.."),
    ",": (".....", ".....", ".....", ".....", "..XX.", "..X..", ".X..."),
    "'": ("..X..", "..X..", ".....", ".....", ".....", ".....", "....."),
    ":": (".....", ".XX..", ".XX..", ".....", ".XX..", ".XX..", "....."),
    "/": ("....X", "...X.", "..X..", ".X...", "X....", "X....", "....."),
    "(": ("...X.", "..X..", "..X..", "..X..", "..X..", "..X..", "...X."),
    ")": (".X...", "..X..", "..X..", "..X..", "..X..", "..X..", ".X..."),
    "%": ("XX..X", "XX.X.", "..X..", "..X..", ".X.XX", "X..XX", "....."),
    "?": (".XXX.", "X...X", "...X.", "..X..", ".....", "..X..", "....."),
}
_UNKNOWN = ("XXXXX", "X...X", "X...X", "X...X", "X...X", "XXXXX", ".....")


def draw_text(canvas, y, x, text, color=INK):
    """Stamp 5x7 glyphs onto an (H, W, 3) float canvas; clips at edges."""
    h, w, _ = canvas.shape
    cx = x
    for ch in str(text).upper():
        glyph = _FONT.get(ch, _UNKNOWN)
        for gy, row in enumerate(glyph):
            for gx, bit in enumerate(row):
                if bit == "X" and 0 <= y + gy < h and 0 <= cx + gx < w:
                    canvas[y + gy, cx + gx] = color
        cx += 6


@dataclass
class RenderSpec:
    colormap: str = "jet"
    alpha: float = 0.5
    format: str = "auto"  # auto | pgm | ppm

    def __post_init__(self):
        if self.colormap not in ("jet", "gray"):
            raise SizeMismatch(f"unknown colormap {self.colormap!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise SizeMismatch("overlay alpha must lie in [0, 1]")
        if self.format not in ("auto", "pgm", "ppm"):
            raise SizeMismatch(f"unsupported format {self.format!r}")


def apply_colormap(values, name="jet"):
    """Map [0,1] values to (H, W, 3) RGB."""
    t = np.asarray(values, dtype=np.float32)
    if name == "gray":
        return np.repeat(t[:, :, None], 3, axis=2)
    r = np.clip(1.5 - np.abs(4.0 * t - 3.0), 0.0, 1.0)
    g = np.clip(1.5 - np.abs(4.0 * t - 2.0), 0.0, 1.0)
    b = np.clip(1.5 - np.abs(4.0 * t - 1.0), 0.0, 1.0)
    return np.stack([r, g, b], axis=2).astype(np.float32)


def _to_rgb_hw3(image):
    arr = as_array(image)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.shape[0] == 1:
        arr = np.repeat(arr, 3, axis=0)
    return arr.transpose(1, 2, 0)


def render_saliency(saliency, base_image, spec, map_path, overlay_path):
    """Write the colormapped map and the alpha-blended overlay.

    The map is min-max normalized per call; constant maps come out as the
    colormap's zero color. Maps smaller than the image are upsampled first.
    """
    base = _to_rgb_hw3(base_image)
    h, w = base.shape[:2]
    values = saliency.values
    if values.shape != (h, w):
        values = bilinear_upsample(values, h, w)
    norm = normalize_map(values)
    colored = apply_colormap(norm, spec.colormap)
    alpha = np.float32(spec.alpha)
    overlay = (np.float32(1.0) - alpha) * base + alpha * colored
    if spec.colormap == "gray" and spec.format != "ppm":
        write_image(norm[None], map_path, format="pgm")
    else:
        write_image(colored.transpose(2, 0, 1), map_path, format="ppm")
    write_image(overlay.transpose(2, 0, 1), overlay_path, format="ppm")
    return map_path, overlay_path


def render_bars(explanation, path, bar_span=100, label_width=132):
    """Horizontal signed bar chart for an Explanation.

    One row per weight in the explanation's order (already sorted by
    magnitude); positive weights grow green bars to the right of the axis,
    negative ones red bars to the left. Feature names label each row.
    """
    entries = explanation.weights
    rows = max(1, len(entries))
    row_h = 12
    width = label_width + 2 * bar_span + 16
    height = rows * row_h + 16
    canvas = np.tile(PAPER, (height, width, 1)).astype(np.float32)
    axis_x = label_width + bar_span + 8
    canvas[8:height - 8, axis_x] = INK
    max_w = max((abs(w) for _, w in entries), default=0.0)
    for r, (feature, weight) in enumerate(entries):
        y = 8 + r * row_h
        name = explanation.name_of(feature)
        draw_text(canvas, y + 2, 4, name[: (label_width - 8) // 6])
        if max_w > 0 and weight != 0.0:
            length = int(round(abs(weight) / max_w * bar_span))
            color = GREEN if weight > 0 else RED
            if weight > 0:
                canvas[y + 2:y + row_h - 2, axis_x + 1:axis_x + 1 + length] = color
            else:
                canvas[y + 2:y + row_h - 2, axis_x - length:axis_x] = color
    write_image(canvas.transpose(2, 0, 1), path, format="ppm")
    return path


def render_segment_weights(explanation, image, segments, path, top_k=None):
    """Tint segments by their signed weight over a dimmed base image.

    Positive contributions tint green, negative red, intensity scaled by
    |weight| relative to the largest magnitude.
    """
    base = _to_rgb_hw3(image) * 0.55 + 0.10
    entries = explanation.weights if top_k is None else explanation.weights[:top_k]
    max_w = max((abs(w) for _, w in entries), default=0.0)
    out = base.copy()
    for feature, weight in entries:
        if max_w == 0 or weight == 0.0:
            continue
        strength = np.float32(abs(weight) / max_w * 0.45)
        color = GREEN if weight > 0 else RED
        mask = segments.labels == feature
        out[mask] = (1 - strength) * out[mask] + strength * color
    write_image(np.clip(out, 0, 1).transpose(2, 0, 1), path, format="ppm")
    return path


def render_anchor_segments(result, image, segments, path):
    """Highlight anchored segments; the rest of the image is dimmed."""
    base = _to_rgb_hw3(image)
    dim = base * 0.35
    keep = np.zeros(segments.labels.shape, dtype=bool)
    for feature, _ in result.predicates:
        keep |= segments.labels == feature
    out = np.where(keep[:, :, None], base, dim)
    write_image(np.clip(out, 0, 1).transpose(2, 0, 1), path, format="ppm")
    return path
