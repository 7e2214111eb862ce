"""Thumbnail normalization, mask refinement, magnification projection and
joint image+mask augmentation.

Fixed pipeline order for dataset preparation: fit_within -> pad_to_square
-> optional augment.  Masks are always resampled nearest-neighbor so they
stay strictly binary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy import ndimage

from . import imaging as im
from .errors import DimensionMismatchError, InvalidParamError
from .rng import Lcg64

__all__ = [
    "PadRecord",
    "AugmentSpec",
    "fit_within",
    "pad_to_square",
    "normalize",
    "unpad",
    "refine_dilate",
    "project_to_magnification",
    "augment_pair",
    "random_augment_spec",
]

WHITE = (255, 255, 255)


@dataclass
class PadRecord:
    original_width: int
    original_height: int
    scaled_width: int
    scaled_height: int
    scale: float
    pad_right: int
    pad_bottom: int


@dataclass
class AugmentSpec:
    rotation_degrees: float = 0.0
    hflip: bool = False
    vflip: bool = False

    def __post_init__(self):
        if not -180.0 <= self.rotation_degrees <= 180.0:
            raise InvalidParamError("rotation must be within [-180, 180]")


def fit_within(img: np.ndarray, max_dim: int = 1024) -> np.ndarray:
    """Downscale so neither dimension exceeds max_dim; never upscales.

    RGB images resample bilinearly; 2-D arrays (masks/gray) use nearest.
    """
    if max_dim < 1:
        raise InvalidParamError("max_dim must be >= 1")
    arr = np.asarray(img)
    h, w = arr.shape[:2]
    if max(h, w) <= max_dim:
        return arr.copy()
    scale = max_dim / max(h, w)
    new_w = max(1, round(w * scale))
    new_h = max(1, round(h * scale))
    resample = Image.BILINEAR if arr.ndim == 3 else Image.NEAREST
    out = Image.fromarray(arr).resize((new_w, new_h), resample)
    return np.asarray(out)


def pad_to_square(img: np.ndarray, size: int = 1024, pad_value=None):
    """Pad right/bottom to size x size, content anchored top-left.

    Default pad: white for RGB, 0 for masks/gray.  Returns (padded,
    PadRecord); unpad() inverts exactly.
    """
    arr = np.asarray(img)
    h, w = arr.shape[:2]
    if h > size or w > size:
        raise InvalidParamError(f"input {w}x{h} larger than target {size}")
    if pad_value is None:
        pad_value = WHITE if arr.ndim == 3 else 0
    if arr.ndim == 3:
        out = np.empty((size, size, arr.shape[2]), dtype=arr.dtype)
        out[:, :] = np.asarray(pad_value, dtype=arr.dtype)
    else:
        out = np.full((size, size), pad_value, dtype=arr.dtype)
    out[:h, :w] = arr
    record = PadRecord(
        original_width=w, original_height=h,
        scaled_width=w, scaled_height=h,
        scale=1.0, pad_right=size - w, pad_bottom=size - h,
    )
    return out, record


def normalize(img: np.ndarray, size: int = 1024, pad_value=None):
    """fit_within then pad_to_square; PadRecord keeps the pre-fit dims."""
    arr = np.asarray(img)
    h, w = arr.shape[:2]
    fitted = fit_within(arr, size)
    padded, record = pad_to_square(fitted, size, pad_value)
    record.original_width = w
    record.original_height = h
    record.scale = record.scaled_width / w
    return padded, record


def unpad(img: np.ndarray, record: PadRecord) -> np.ndarray:
    return np.asarray(img)[: record.scaled_height, : record.scaled_width].copy()


def refine_dilate(mask: np.ndarray) -> np.ndarray:
    """3x3 dilation pass so border tissue pixels survive downstream steps."""
    return im.dilate(mask, radius=1, iterations=1)


def project_to_magnification(mask: np.ndarray, factor: int) -> np.ndarray:
    """Nearest-neighbor upscale: each pixel becomes a factor x factor block."""
    if factor < 1:
        raise InvalidParamError("factor must be >= 1")
    arr = np.asarray(mask)
    return np.repeat(np.repeat(arr, factor, axis=0), factor, axis=1)


def _rotate(arr: np.ndarray, degrees: float, is_mask: bool) -> np.ndarray:
    """Rotate about the image center; positive angles counterclockwise.

    Axis-aligned angles are exact pixel permutations (square frames);
    arbitrary angles interpolate (bilinear RGB / nearest mask) with
    out-of-frame filled white (RGB) or 0 (mask).
    """
    degrees = degrees % 360.0
    if degrees == 0.0:
        return arr.copy()
    if degrees in (90.0, 180.0, 270.0) and arr.shape[0] == arr.shape[1]:
        return np.ascontiguousarray(np.rot90(arr, k=int(degrees // 90)))
    order = 0 if is_mask else 1
    cval = 0 if is_mask else 255
    out = ndimage.rotate(
        arr, degrees, axes=(1, 0), reshape=False, order=order,
        mode="constant", cval=cval, prefilter=False,
    )
    return out.astype(arr.dtype)


def augment_pair(img: np.ndarray, mask: np.ndarray, spec: AugmentSpec):
    """Rotation, then hflip, then vflip, applied jointly to both rasters."""
    img = np.asarray(img)
    mask = np.asarray(mask)
    if img.shape[:2] != mask.shape[:2]:
        raise DimensionMismatchError(
            f"image {img.shape[:2]} vs mask {mask.shape[:2]}"
        )
    out_img = _rotate(img, spec.rotation_degrees, is_mask=False)
    out_mask = _rotate(mask, spec.rotation_degrees, is_mask=True)
    if spec.hflip:
        out_img = out_img[:, ::-1].copy()
        out_mask = out_mask[:, ::-1].copy()
    if spec.vflip:
        out_img = out_img[::-1].copy()
        out_mask = out_mask[::-1].copy()
    return out_img, out_mask


def random_augment_spec(seed: int) -> AugmentSpec:
    """Draw (rotation in [-180, 180), hflip, vflip) from the portable LCG."""
    rng = Lcg64(seed)
    return AugmentSpec(
        rotation_degrees=rng.uniform(-180.0, 180.0),
        hflip=rng.coin(),
        vflip=rng.coin(),
    )
