"""Foundational raster operations.

Conventions used throughout the toolkit:

- RGB images are ``uint8`` arrays of shape ``(H, W, 3)``.
- Gray images are ``uint8`` arrays of shape ``(H, W)``.
- Binary masks are ``uint8`` arrays of shape ``(H, W)`` with values in {0, 1};
  1 marks tissue (positive), 0 background.
- Lab images are ``float64`` arrays of shape ``(H, W, 3)`` holding CIELAB
  (L in [0, 100], a/b signed) computed from sRGB under D65.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import DegenerateHistogramError, InvalidParamError

__all__ = [
    "to_grayscale",
    "rgb_to_lab",
    "histogram",
    "otsu_threshold",
    "mean_threshold",
    "binarize",
    "gaussian_blur",
    "dilate",
    "erode",
    "invert",
    "connected_components",
    "remove_small_components",
]

# ITU-R BT.601 luma weights
_LUMA_R, _LUMA_G, _LUMA_B = 0.299, 0.587, 0.114

# sRGB -> XYZ (D65) matrix
_SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_D65_WHITE = np.array([0.95047, 1.0, 1.08883])


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """BT.601 luma: round(0.299 R + 0.587 G + 0.114 B), clamped to [0, 255]."""
    rgb = np.asarray(img, dtype=np.float64)
    luma = _LUMA_R * rgb[..., 0] + _LUMA_G * rgb[..., 1] + _LUMA_B * rgb[..., 2]
    return np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8)


def rgb_to_lab(img: np.ndarray) -> np.ndarray:
    """sRGB -> linear RGB -> XYZ -> CIELAB, D65 white point."""
    srgb = np.asarray(img, dtype=np.float64) / 255.0
    linear = np.where(
        srgb <= 0.04045, srgb / 12.92, ((srgb + 0.055) / 1.055) ** 2.4
    )
    xyz = linear @ _SRGB_TO_XYZ.T
    t = xyz / _D65_WHITE
    delta = 6.0 / 29.0
    f = np.where(t > delta**3, np.cbrt(t), t / (3 * delta**2) + 4.0 / 29.0)
    lab = np.empty_like(xyz)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def histogram(img: np.ndarray) -> np.ndarray:
    """256-bin gray-level histogram; bins sum to the pixel count."""
    return np.bincount(np.asarray(img, dtype=np.uint8).ravel(), minlength=256)


def otsu_threshold(hist: np.ndarray) -> int:
    """Threshold maximizing between-class variance of {v <= t} vs {v > t}.

    Ties break toward the smallest t; result lies in [0, 254].  Raises
    DegenerateHistogramError when all mass sits in one bin (no two-class
    split exists) so the caller picks its own fallback.
    """
    h = np.asarray(hist, dtype=np.float64)
    total = h.sum()
    if total < 1:
        raise DegenerateHistogramError("empty histogram")
    if np.count_nonzero(h) < 2:
        raise DegenerateHistogramError("all mass in a single bin")

    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(h)[:-1]  # mass of {v <= t} for t = 0..254
    w1 = total - w0
    s0 = np.cumsum(h * levels)[:-1]
    mu0 = np.divide(s0, w0, out=np.zeros_like(s0), where=w0 > 0)
    mu1 = np.divide(h @ levels - s0, w1, out=np.zeros_like(s0), where=w1 > 0)
    var_between = w0 * w1 * (mu0 - mu1) ** 2
    return int(np.argmax(var_between))  # argmax returns the first (smallest) max


def mean_threshold(img: np.ndarray) -> int:
    """Floor of the arithmetic mean of all pixel values."""
    arr = np.asarray(img, dtype=np.uint64)
    return int(arr.sum() // arr.size)


def binarize(img: np.ndarray, t: int, polarity: str) -> np.ndarray:
    """Strict-inequality thresholding; pixels equal to t are background.

    polarity: "dark" -> foreground where value < t;
              "bright" -> foreground where value > t.
    """
    if not 0 <= t <= 255:
        raise InvalidParamError(f"threshold {t} outside [0, 255]")
    arr = np.asarray(img)
    if polarity == "dark":
        return (arr < t).astype(np.uint8)
    if polarity == "bright":
        return (arr > t).astype(np.uint8)
    raise InvalidParamError(f"unknown polarity {polarity!r}")


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Sampled, normalized 1-D Gaussian of radius ceil(3*sigma)."""
    if sigma <= 0:
        raise InvalidParamError("sigma must be > 0")
    radius = int(np.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x**2) / (2.0 * sigma**2))
    return k / k.sum()


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian smoothing, clamp-to-edge borders, 8-bit rounding."""
    k = gaussian_kernel(sigma)
    out = np.asarray(img, dtype=np.float64)
    out = ndimage.correlate1d(out, k, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, k, axis=1, mode="nearest")
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def _square(radius: int) -> np.ndarray:
    if radius < 1:
        raise InvalidParamError("radius must be >= 1")
    return np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)


def dilate(mask: np.ndarray, radius: int = 1, iterations: int = 1) -> np.ndarray:
    """Binary dilation with a square element; outside the frame is background."""
    if iterations < 1:
        raise InvalidParamError("iterations must be >= 1")
    out = ndimage.binary_dilation(
        np.asarray(mask, dtype=bool), structure=_square(radius),
        iterations=iterations, border_value=0,
    )
    return out.astype(np.uint8)


def erode(mask: np.ndarray, radius: int = 1, iterations: int = 1) -> np.ndarray:
    """Binary erosion with a square element.

    Defined as the exact dual of background-padded dilation:
    erode(m) = invert(dilate(invert(m))), so the out-of-frame
    neighborhood counts as foreground (border_value=1).
    """
    if iterations < 1:
        raise InvalidParamError("iterations must be >= 1")
    out = ndimage.binary_erosion(
        np.asarray(mask, dtype=bool), structure=_square(radius),
        iterations=iterations, border_value=1,
    )
    return out.astype(np.uint8)


def invert(mask: np.ndarray) -> np.ndarray:
    """Per-pixel 1 - v."""
    return (1 - np.asarray(mask, dtype=np.uint8)).astype(np.uint8)


_STRUCT_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCT_8 = np.ones((3, 3), dtype=bool)


def connected_components(mask: np.ndarray, connectivity: int = 8):
    """Label foreground components 1..N; returns (labels, areas).

    areas[i] is the pixel count of component i+1; their sum equals the
    foreground pixel count.
    """
    if connectivity not in (4, 8):
        raise InvalidParamError("connectivity must be 4 or 8")
    structure = _STRUCT_4 if connectivity == 4 else _STRUCT_8
    labels, n = ndimage.label(np.asarray(mask, dtype=bool), structure=structure)
    areas = np.bincount(labels.ravel(), minlength=n + 1)[1:]
    return labels, areas


def remove_small_components(
    mask: np.ndarray, min_area: int, connectivity: int = 8
) -> np.ndarray:
    """Drop foreground components with area < min_area."""
    if min_area <= 0:
        return np.asarray(mask, dtype=np.uint8).copy()
    labels, areas = connected_components(mask, connectivity)
    keep = np.flatnonzero(areas >= min_area) + 1
    return np.isin(labels, keep).astype(np.uint8)
