"""Image and artifact input/output.

Binary PGM (P5) is read and written directly so that 8- and 16-bit samples
round-trip bit-exactly; PNG decoding goes through Pillow.
"""
import json
import re
from pathlib import Path

import numpy as np
from PIL import Image

_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*(\S+)")


class ImageFormatError(ValueError):
    """Raised for unreadable, malformed or multi-channel images."""


def _pgm_header(data):
    tokens = []
    pos = 0
    for _ in range(4):
        m = _PGM_TOKEN.match(data, pos)
        if m is None:
            raise ImageFormatError("truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    if tokens[0] != b"P5":
        raise ImageFormatError(f"not a binary PGM (magic {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise ImageFormatError("non-numeric PGM header field") from exc
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise ImageFormatError(f"invalid PGM header {width}x{height} maxval {maxval}")
    # exactly one whitespace byte separates the header from the raster
    return width, height, maxval, pos + 1


def read_pgm(path):
    """Decode a P5 file into a ``uint8`` or ``uint16`` array.

    Samples with ``maxval > 255`` are two bytes, most significant first.
    """
    data = Path(path).read_bytes()
    width, height, maxval, offset = _pgm_header(data)
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height
    if len(data) - offset < count * dtype.itemsize:
        raise ImageFormatError(f"{path}: raster shorter than {width}x{height}")
    raster = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
    return raster.reshape(height, width).astype(dtype.newbyteorder("="))


def write_pgm(path, image, maxval=None):
    """Encode an integer array as P5; 16-bit when any sample exceeds 255."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise ImageFormatError(f"PGM needs a 2-D array, got shape {image.shape}")
    if not np.issubdtype(image.dtype, np.integer):
        raise ImageFormatError("PGM samples must be integers")
    if image.size and (image.min() < 0 or image.max() > 65535):
        raise ImageFormatError("PGM samples must lie in [0, 65535]")
    if maxval is None:
        wide = image.dtype.itemsize > 1 or (image.size and image.max() > 255)
        maxval = 65535 if wide else 255
    if image.size and image.max() > maxval:
        raise ImageFormatError(f"sample {image.max()} exceeds maxval {maxval}")
    dtype = ">u2" if maxval > 255 else "u1"
    header = f"P5\n{image.shape[1]} {image.shape[0]}\n{maxval}\n".encode("ascii")
    Path(path).write_bytes(header + image.astype(dtype).tobytes())


def read_image(path):
    """Read a single-channel PGM or PNG as a 2-D array of raw sample values."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(8)
    if magic[:2] == b"P5":
        return read_pgm(path)
    if magic[:8] == b"\x89PNG\r\n\x1a\n":
        with Image.open(path) as img:
            if img.mode not in ("L", "I;16", "I;16B", "I", "1"):
                raise ImageFormatError(f"{path}: multi-channel PNG (mode {img.mode}) rejected")
            arr = np.asarray(img)
        if arr.ndim != 2:
            raise ImageFormatError(f"{path}: expected 2-D raster, got {arr.shape}")
        return arr
    raise ImageFormatError(f"{path}: unsupported image format")


def rescale_to_uint16(image):
    """Map the full value range of `image` linearly onto ``[0, 65535]``.

    Returns the 16-bit image and the ``{"min", "max", "scale"}`` record
    needed to invert the mapping (``value = min + sample / scale``).
    """
    image = np.asarray(image, dtype=float)
    lo, hi = float(image.min()), float(image.max())
    scale = 65535.0 / (hi - lo) if hi > lo else 0.0
    out = np.rint((image - lo) * scale).astype(np.uint16)
    return out, {"min": lo, "max": hi, "scale": scale}


def to_uint8(image):
    """Normalize to ``[0, 255]`` by the image range; constant images map to 0."""
    image = np.asarray(image, dtype=float)
    lo, hi = float(image.min()), float(image.max())
    if hi <= lo:
        return np.zeros(image.shape, dtype=np.uint8)
    return np.rint((image - lo) * (255.0 / (hi - lo))).astype(np.uint8)


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
