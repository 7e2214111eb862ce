"""The five mask-producing methods behind one dispatching interface.

Method ids (canonical strings used by the CLI and the review service):
``handcrafted``, ``otsu``, ``fesi``, ``tissueloc``, ``histomics``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, fields
from typing import Optional, Union

import numpy as np

from . import contours as ct
from . import imaging as im
from .errors import DegenerateHistogramError, InvalidParamError

__all__ = [
    "HandcraftedParams",
    "FesiParams",
    "TissueLocParams",
    "HistomicsParams",
    "MethodSpec",
    "MaskResult",
    "METHOD_IDS",
    "handcrafted_mask",
    "otsu_mask",
    "fesi_mask",
    "tissueloc_mask",
    "histomics_like_mask",
    "segment",
    "make_spec",
]


@dataclass
class HandcraftedParams:
    # "otsu" or a fixed integer threshold
    binarization: Union[str, int] = "otsu"
    area_threshold: float = 500.0
    ratio_threshold: float = 0.1
    dist_threshold: float = 50.0
    h_lower_thresh: float = 9.0
    h_upper_thresh: float = 2500.0
    # literal reading of the algorithm keeps depth-0 parents; "exclude"
    # exposes the alternative reading where only children are filled
    parents: str = "include"

    def __post_init__(self):
        if isinstance(self.binarization, str):
            if self.binarization != "otsu":
                raise InvalidParamError("binarization must be 'otsu' or an int")
        elif not 0 <= int(self.binarization) <= 255:
            raise InvalidParamError("fixed threshold outside [0, 255]")
        if min(self.area_threshold, self.dist_threshold,
               self.h_lower_thresh, self.h_upper_thresh) <= 0:
            raise InvalidParamError("all thresholds must be > 0")
        if not 0 < self.ratio_threshold <= 1:
            raise InvalidParamError("ratio_threshold must be in (0, 1]")
        if self.h_lower_thresh >= self.h_upper_thresh:
            raise InvalidParamError("h_lower_thresh must be < h_upper_thresh")
        if self.parents not in ("include", "exclude"):
            raise InvalidParamError("parents must be 'include' or 'exclude'")


@dataclass
class FesiParams:
    sigma: float = 5.0
    min_region_area: int = 50

    def __post_init__(self):
        if self.sigma <= 0:
            raise InvalidParamError("sigma must be > 0")
        if self.min_region_area < 0:
            raise InvalidParamError("min_region_area must be >= 0")


@dataclass
class TissueLocParams:
    erode_radius: int = 1
    dilate_radius: int = 1
    min_tissue_size: int = 50

    def __post_init__(self):
        if self.erode_radius < 1 or self.dilate_radius < 1:
            raise InvalidParamError("radii must be >= 1")
        if self.min_tissue_size < 0:
            raise InvalidParamError("min_tissue_size must be >= 0")


@dataclass
class HistomicsParams:
    sigma: float = 2.0
    thresholding_steps: int = 1
    min_size: int = 50

    def __post_init__(self):
        if self.sigma <= 0:
            raise InvalidParamError("sigma must be > 0")
        if self.thresholding_steps < 1:
            raise InvalidParamError("thresholding_steps must be >= 1")
        if self.min_size < 0:
            raise InvalidParamError("min_size must be >= 0")


_PARAM_TYPES = {
    "handcrafted": HandcraftedParams,
    "otsu": type(None),
    "fesi": FesiParams,
    "tissueloc": TissueLocParams,
    "histomics": HistomicsParams,
}

METHOD_IDS = tuple(_PARAM_TYPES)


@dataclass
class MethodSpec:
    method: str
    params: object = None

    def __post_init__(self):
        if self.method not in _PARAM_TYPES:
            raise InvalidParamError(f"unknown method {self.method!r}")
        expected = _PARAM_TYPES[self.method]
        if self.params is None and expected is not type(None):
            self.params = expected()
        elif not isinstance(self.params, expected):
            raise InvalidParamError(
                f"method {self.method!r} expects {expected.__name__} params"
            )


@dataclass
class MaskResult:
    mask: np.ndarray
    elapsed_seconds: float


def make_spec(method: str, overrides: Optional[dict] = None) -> MethodSpec:
    """Build a MethodSpec from a method id and a flat key->value dict.

    Values are coerced to the field's declared type; unknown keys raise
    InvalidParamError naming the field.
    """
    if method not in _PARAM_TYPES:
        raise InvalidParamError(f"unknown method {method!r}")
    cls = _PARAM_TYPES[method]
    overrides = overrides or {}
    if cls is type(None):
        if overrides:
            raise InvalidParamError(
                f"method 'otsu' takes no parameters, got {sorted(overrides)}"
            )
        return MethodSpec(method)
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in overrides.items():
        if key not in known:
            raise InvalidParamError(f"unknown parameter {key!r} for {method}")
        kwargs[key] = _coerce(value, known[key].default)
    return MethodSpec(method, cls(**kwargs))


def _coerce(value, default):
    if isinstance(default, bool):
        return str(value).lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    # mixed str/int fields (handcrafted binarization)
    if isinstance(value, str) and value.isdigit():
        return int(value)
    return value


def _otsu_binarize_dark(gray: np.ndarray) -> Optional[np.ndarray]:
    """Otsu + dark-is-foreground; None when the histogram is degenerate.

    otsu_threshold returns the largest level of the dark class {v <= t},
    so with the strict-inequality binarize convention the cut is t + 1.
    """
    try:
        t = im.otsu_threshold(im.histogram(gray))
    except DegenerateHistogramError:
        return None
    return im.binarize(gray, t + 1, "dark")


def handcrafted_mask(img: np.ndarray, p: HandcraftedParams = None) -> np.ndarray:
    """Contour-hierarchy masking of a thumbnail.

    Binarize (tissue dark), take the contour hierarchy, keep all depth-0
    contours plus depth-1 children selected by area ratio, proximity and
    absolute area; fill them white; then re-blacken enclosed holes whose
    area falls inside (h_lower_thresh, h_upper_thresh).
    """
    p = p or HandcraftedParams()
    gray = im.to_grayscale(img)
    if isinstance(p.binarization, str):
        bin_thmb = _otsu_binarize_dark(gray)
        if bin_thmb is None:
            return np.zeros(gray.shape, dtype=np.uint8)
    else:
        bin_thmb = im.binarize(gray, int(p.binarization), "dark")

    tree = ct.find_contours(bin_thmb)
    chosen: list[ct.Contour] = []
    chosen_ids = set()

    def choose(c):
        chosen.append(c)
        chosen_ids.add(c.index)

    if p.parents == "include":
        for c in tree.at_depth(0):
            choose(c)

    children = sorted(tree.at_depth(1), key=lambda c: c.area, reverse=True)
    if children:
        choose(children[0])
        i = 1
        while i < len(children) and children[i].area > min(
            children[i - 1].area * p.ratio_threshold, p.area_threshold
        ):
            choose(children[i])
            i += 1

    for c in children:
        if c.index in chosen_ids:
            continue
        if chosen and min(
            ct.contour_distance(c, k) for k in chosen
        ) < p.dist_threshold:
            choose(c)

    for c in children:
        if c.index not in chosen_ids and c.area > p.area_threshold:
            choose(c)

    final = ct.fill_contours(chosen, 1, shape=bin_thmb.shape)

    holes, hole_areas = im.connected_components(im.invert(bin_thmb), connectivity=4)
    for lbl in np.flatnonzero(
        (hole_areas > p.h_lower_thresh) & (hole_areas < p.h_upper_thresh)
    ) + 1:
        final[holes == lbl] = 0
    return final


def otsu_mask(img: np.ndarray) -> np.ndarray:
    """Grayscale + Otsu, tissue = darker class."""
    mask = _otsu_binarize_dark(im.to_grayscale(img))
    if mask is None:
        return np.zeros(img.shape[:2], dtype=np.uint8)
    return mask


def fesi_mask(img: np.ndarray, p: FesiParams = None) -> np.ndarray:
    """Lab-based masking: saturate L and a, read tissue off the b channel.

    Stained tissue sits blue-shifted (negative b) against the neutral
    slide background, so b is rescaled with tissue at the bright end,
    thresholded at the image mean, smoothed, re-thresholded at the
    midpoint and cleaned of small regions.
    """
    p = p or FesiParams()
    lab = im.rgb_to_lab(img)
    b = lab[..., 2]
    b_min, b_max = float(b.min()), float(b.max())
    if b_max == b_min:
        gray = np.zeros(b.shape, dtype=np.uint8)
    else:
        scaled = (b_max - b) / (b_max - b_min) * 255.0
        gray = np.floor(scaled + 0.5).astype(np.uint8)
    binary = im.binarize(gray, im.mean_threshold(gray), "bright")
    blurred = im.gaussian_blur(binary * np.uint8(255), p.sigma)
    mask = im.binarize(blurred, 127, "bright")  # >= 128 -> tissue
    return im.remove_small_components(mask, p.min_region_area)


def tissueloc_mask(img: np.ndarray, p: TissueLocParams = None) -> np.ndarray:
    """Inverse Otsu binarization, opening, then minimum-size filtering."""
    p = p or TissueLocParams()
    mask = _otsu_binarize_dark(im.to_grayscale(img))
    if mask is None:
        return np.zeros(img.shape[:2], dtype=np.uint8)
    mask = im.erode(mask, p.erode_radius, 1)
    mask = im.dilate(mask, p.dilate_radius, 1)
    return im.remove_small_components(mask, p.min_tissue_size)


def histomics_like_mask(img: np.ndarray, p: HistomicsParams = None) -> np.ndarray:
    """Gaussian smoothing + Otsu thresholding rounds, then size filtering.

    Rounds after the first restrict the histogram to pixels still
    counted as foreground.
    """
    p = p or HistomicsParams()
    gray = im.to_grayscale(img)
    blurred = im.gaussian_blur(gray, p.sigma)
    fg = np.ones(gray.shape, dtype=bool)
    for _ in range(p.thresholding_steps):
        hist = np.bincount(blurred[fg].ravel(), minlength=256)
        try:
            t = im.otsu_threshold(hist)
        except DegenerateHistogramError:
            return np.zeros(gray.shape, dtype=np.uint8)
        fg &= blurred < t
    return im.remove_small_components(fg.astype(np.uint8), p.min_size)


_DISPATCH = {
    "handcrafted": lambda img, p: handcrafted_mask(img, p),
    "otsu": lambda img, p: otsu_mask(img),
    "fesi": lambda img, p: fesi_mask(img, p),
    "tissueloc": lambda img, p: tissueloc_mask(img, p),
    "histomics": lambda img, p: histomics_like_mask(img, p),
}


def segment(img: np.ndarray, spec: MethodSpec) -> MaskResult:
    """Run the method named by spec; elapsed time covers the call only."""
    if spec.method not in _DISPATCH:
        raise InvalidParamError(f"unknown method {spec.method!r}")
    expected = _PARAM_TYPES[spec.method]
    if not isinstance(spec.params, expected):
        raise InvalidParamError(
            f"method {spec.method!r} expects {expected.__name__} params"
        )
    start = time.perf_counter()
    mask = _DISPATCH[spec.method](img, spec.params)
    elapsed = time.perf_counter() - start
    return MaskResult(mask=mask, elapsed_seconds=elapsed)
