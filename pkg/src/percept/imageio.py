"""Binary PGM (P5) and PPM (P6) codecs.

Pixels are 8-bit with maxval 255 and scale to [0, 1] floats on read; writing
rounds back to bytes, so read -> write round-trips are byte-exact for 8-bit
files.
"""

import numpy as np

from .errors import FormatError, UnsupportedMaxVal
from .tensor import Tensor, as_array


def _read_token(blob, pos):
    """Next whitespace-delimited token, skipping '#' comment lines."""
    n = len(blob)
    while pos < n:
        ch = blob[pos:pos + 1]
        if ch == b"#":
            while pos < n and blob[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            break
    if pos >= n:
        raise FormatError("unexpected end of header", pos)
    start = pos
    while pos < n and not blob[pos:pos + 1].isspace():
        pos += 1
    return blob[start:pos], pos


def read_image(path):
    """Read a binary PGM/PPM file into a (C, H, W) Tensor scaled to [0, 1]."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 2:
        raise FormatError("file too short for a PNM magic", 0)
    magic = blob[:2]
    if magic not in (b"P5", b"P6"):
        raise FormatError(f"unsupported magic {magic!r}; want P5 or P6", 0)
    channels = 1 if magic == b"P5" else 3
    pos = 2
    fields = []
    for what in ("width", "height", "maxval"):
        token, pos = _read_token(blob, pos)
        try:
            fields.append(int(token))
        except ValueError:
            raise FormatError(f"non-numeric {what} {token!r}", pos) from None
    width, height, maxval = fields
    if maxval != 255:
        raise UnsupportedMaxVal(f"maxval {maxval} unsupported; only 255")
    if width < 1 or height < 1:
        raise FormatError(f"bad dimensions {width}x{height}", pos)
    pos += 1  # single whitespace byte after maxval
    expected = width * height * channels
    if len(blob) - pos < expected:
        raise FormatError(
            f"pixel payload truncated: need {expected} bytes, "
            f"have {len(blob) - pos}", pos)
    raw = np.frombuffer(blob, dtype=np.uint8, count=expected, offset=pos)
    if channels == 1:
        arr = raw.reshape(1, height, width)
    else:
        arr = raw.reshape(height, width, 3).transpose(2, 0, 1)
    return Tensor(arr.astype(np.float32) / 255.0)


def write_image(image, path, format=None):
    """Write a (C, H, W) or (H, W) array in [0, 1] as binary PGM or PPM.

    The format defaults to PGM for single-channel data and PPM for
    3-channel; a single channel written as PPM is replicated to gray.
    """
    arr = as_array(image)
    if arr.ndim == 2:
        arr = arr[None, :, :]
    if arr.ndim != 3 or arr.shape[0] not in (1, 3):
        raise FormatError(f"expected 1 or 3 channels, got shape {arr.shape}", 0)
    if format is None:
        format = "pgm" if arr.shape[0] == 1 else "ppm"
    format = format.lower()
    if format not in ("pgm", "ppm"):
        raise FormatError(f"unsupported output format {format!r}", 0)
    if format == "ppm" and arr.shape[0] == 1:
        arr = np.repeat(arr, 3, axis=0)
    if format == "pgm" and arr.shape[0] != 1:
        raise FormatError("cannot write 3-channel data as PGM", 0)
    c, h, w = arr.shape
    bytes_ = np.rint(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    if c == 1:
        payload = bytes_[0].tobytes()
        header = b"P5\n%d %d\n255\n" % (w, h)
    else:
        payload = bytes_.transpose(1, 2, 0).tobytes()
        header = b"P6\n%d %d\n255\n" % (w, h)
    with open(path, "wb") as fh:
        fh.write(header + payload)
