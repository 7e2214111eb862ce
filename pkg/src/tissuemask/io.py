"""Raster I/O: PNG/JPEG decode, binary-mask PNG encode/decode."""

from __future__ import annotations

import os
import tempfile
import warnings
from pathlib import Path

import numpy as np
from PIL import Image

__all__ = ["read_image", "read_mask", "write_mask", "mask_to_png_bytes",
           "mask_from_png_bytes"]


def read_image(path) -> np.ndarray:
    """Decode any PIL-supported raster to (H, W, 3) uint8 RGB."""
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def _decode_mask(img: Image.Image, origin: str) -> np.ndarray:
    arr = np.asarray(img.convert("L"))
    values = np.unique(arr)
    if not set(values.tolist()) <= {0, 255}:
        warnings.warn(
            f"{origin}: mask has values outside {{0, 255}}; "
            "binarizing at >= 128",
            stacklevel=3,
        )
    return (arr >= 128).astype(np.uint8)


def read_mask(path) -> np.ndarray:
    """Decode a mask PNG to {0, 1}; >= 128 counts as tissue (with warning)."""
    with Image.open(path) as img:
        return _decode_mask(img, str(path))


def mask_to_png_bytes(mask: np.ndarray) -> bytes:
    import io as _io

    arr = (np.asarray(mask, dtype=np.uint8) * 255).astype(np.uint8)
    buf = _io.BytesIO()
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def mask_from_png_bytes(data: bytes) -> np.ndarray:
    import io as _io

    with Image.open(_io.BytesIO(data)) as img:
        return _decode_mask(img, "<bytes>")


def write_mask(path, mask: np.ndarray, atomic: bool = False) -> None:
    """Write a {0,1} mask as 8-bit grayscale PNG with values {0, 255}.

    atomic=True writes to a temp file in the same directory and renames,
    so readers never observe a partial file.
    """
    path = Path(path)
    data = mask_to_png_bytes(mask)
    if atomic:
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as f:
                f.write(data)
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    else:
        path.write_bytes(data)
