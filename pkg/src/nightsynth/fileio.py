"""Lossless image file I/O: 8-bit PNG and 8/16-bit binary PPM.

Pillow truncates 48-bit RGB PNGs to 8 bits per channel, so 16-bit PNG ingest
is rejected as an unsupported depth and the 16-bit output path writes binary
PPM (P6, maxval 65535, big-endian) instead.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .core import IngestError

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def _png_bit_depth(path: Path) -> int:
    with open(path, "rb") as fh:
        head = fh.read(26)
    if len(head) < 26 or not head.startswith(_PNG_SIGNATURE):
        raise IngestError(f"{path}: not a valid PNG file")
    return head[24]


def _read_png(path: Path) -> np.ndarray:
    depth = _png_bit_depth(path)
    if depth == 16:
        raise IngestError(
            f"{path}: 16-bit PNG is unsupported; use 16-bit PPM for deep inputs"
        )
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode != "RGB":
                raise IngestError(f"{path}: 3 channels required, got mode {im.mode!r}")
            return np.asarray(im, dtype=np.uint8)
    except IngestError:
        raise
    except Exception as exc:
        raise IngestError(f"{path}: unreadable PNG ({exc})") from exc


def _read_token(fh) -> bytes:
    # One whitespace-delimited header token, skipping '#' comments.
    token = b""
    while True:
        ch = fh.read(1)
        if not ch:
            raise IngestError("truncated PPM header")
        if ch == b"#":
            while ch and ch != b"\n":
                ch = fh.read(1)
            continue
        if ch.isspace():
            if token:
                return token
            continue
        token += ch


def _read_ppm(path: Path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = _read_token(fh)
        if magic != b"P6":
            raise IngestError(f"{path}: only binary (P6) PPM is supported, got {magic!r}")
        width = int(_read_token(fh))
        height = int(_read_token(fh))
        maxval = int(_read_token(fh))
        if maxval == 255:
            dtype, itemsize = np.uint8, 1
        elif maxval == 65535:
            dtype, itemsize = np.dtype(">u2"), 2
        else:
            raise IngestError(f"{path}: unsupported PPM maxval {maxval}")
        payload = fh.read(width * height * 3 * itemsize)
    if len(payload) != width * height * 3 * itemsize:
        raise IngestError(f"{path}: truncated PPM payload")
    arr = np.frombuffer(payload, dtype=dtype).reshape(height, width, 3)
    return arr.astype(np.uint16) if itemsize == 2 else arr


def read_image(path) -> tuple[np.ndarray, int]:
    """Read an 8- or 16-bit RGB image; returns (integer array, maxval)."""
    p = Path(path)
    if not p.is_file():
        raise IngestError(f"{p}: no such file")
    suffix = p.suffix.lower()
    if suffix == ".png":
        return _read_png(p), 255
    if suffix in (".ppm", ".pnm"):
        arr = _read_ppm(p)
        return arr, 255 if arr.dtype == np.uint8 else 65535
    raise IngestError(f"{p}: unsupported format {suffix!r} (PNG or PPM required)")


def quantize(data: np.ndarray, bit_depth: int) -> np.ndarray:
    """Round [0,1] float samples to the integer grid of the given depth."""
    if bit_depth == 8:
        maxval, dtype = 255, np.uint8
    elif bit_depth == 16:
        maxval, dtype = 65535, np.uint16
    else:
        raise ValueError(f"bit_depth must be 8 or 16, got {bit_depth}")
    clipped = np.clip(np.asarray(data, dtype=np.float64), 0.0, 1.0)
    return np.round(clipped * maxval).astype(dtype)


def encode_image(arr: np.ndarray, bit_depth: int) -> bytes:
    """Encode a quantized HxWx3 array: PNG for 8-bit, binary PPM for 16-bit."""
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an HxWx3 array, got shape {arr.shape}")
    if bit_depth == 8:
        if arr.dtype != np.uint8:
            raise ValueError("8-bit encoding requires a uint8 array")
        buf = io.BytesIO()
        # low compression level: ~4x faster than the default and still lossless;
        # a fixed level keeps the byte stream deterministic
        Image.fromarray(arr, mode="RGB").save(buf, format="PNG", compress_level=1)
        return buf.getvalue()
    if bit_depth == 16:
        if arr.dtype != np.uint16:
            raise ValueError("16-bit encoding requires a uint16 array")
        header = f"P6\n{arr.shape[1]} {arr.shape[0]}\n65535\n".encode()
        return header + arr.astype(">u2").tobytes()
    raise ValueError(f"bit_depth must be 8 or 16, got {bit_depth}")


def write_image(path, arr: np.ndarray, bit_depth: int) -> None:
    Path(path).write_bytes(encode_image(arr, bit_depth))


def output_suffix(bit_depth: int) -> str:
    return ".png" if bit_depth == 8 else ".ppm"
