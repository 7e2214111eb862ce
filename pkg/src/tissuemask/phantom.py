"""Synthetic thumbnail generator with known ground truth.

The generator paints rectangular "tissue" blobs on a bright slide-like
background and returns both the RGB raster and the exact ground-truth
mask, so it serves as an oracle for every masking method:

- background: near-white, default flat (245, 245, 245); optional +-5
  seeded noise per pixel;
- tissue: an H&E-like tint, default (120, 65, 95) (luma ~ 85, and
  blue-shifted in Lab so color-based methods see it); optional +-30
  seeded luma jitter;
- specks: small dark squares below the 50-px size-filter cutoff, not
  part of the ground truth;
- holes: background-colored rectangles punched inside blobs, excluded
  from the ground truth.

Rectangles keep edges axis-aligned, so smoothing-based methods recover
the region without boundary ambiguity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["PhantomSpec", "Rect", "make_phantom", "single_blob_phantom"]

BACKGROUND_RGB = (245, 245, 245)
TISSUE_RGB = (120, 65, 95)


@dataclass(frozen=True)
class Rect:
    """Half-open pixel rectangle: rows [top, bottom), cols [left, right)."""

    top: int
    left: int
    bottom: int
    right: int

    @property
    def area(self) -> int:
        return (self.bottom - self.top) * (self.right - self.left)


@dataclass
class PhantomSpec:
    width: int = 256
    height: int = 256
    blobs: list = field(default_factory=list)  # list[Rect]
    holes: list = field(default_factory=list)  # list[Rect], inside blobs
    specks: list = field(default_factory=list)  # list[Rect], area < 50
    background_noise: int = 0  # +- range on each background channel
    tissue_noise: int = 0  # +- range on tissue luma
    seed: int = 0


def make_phantom(spec: PhantomSpec):
    """Render the phantom; returns (rgb uint8 HxWx3, ground-truth mask)."""
    h, w = spec.height, spec.width
    rgb = np.empty((h, w, 3), dtype=np.float64)
    rgb[:, :] = BACKGROUND_RGB
    rng = np.random.RandomState(spec.seed)
    if spec.background_noise:
        rgb += rng.randint(
            -spec.background_noise, spec.background_noise + 1, size=(h, w, 1)
        )

    gt = np.zeros((h, w), dtype=np.uint8)
    tissue = np.zeros((h, w), dtype=bool)
    for r in spec.blobs:
        tissue[r.top : r.bottom, r.left : r.right] = True
    for r in spec.holes:
        tissue[r.top : r.bottom, r.left : r.right] = False
    gt[tissue] = 1

    color = np.empty((h, w, 3), dtype=np.float64)
    color[:, :] = TISSUE_RGB
    if spec.tissue_noise:
        color += rng.randint(-spec.tissue_noise, spec.tissue_noise + 1, size=(h, w, 1))
    rgb[tissue] = color[tissue]

    for r in spec.specks:
        rgb[r.top : r.bottom, r.left : r.right] = TISSUE_RGB

    return np.clip(rgb, 0, 255).astype(np.uint8), gt


def single_blob_phantom(size: int = 512, margin: int = 106):
    """One centered rectangular blob, noise free; Jaccard oracle = 1."""
    blob = Rect(margin, margin, size - margin, size - margin)
    return make_phantom(
        PhantomSpec(width=size, height=size, blobs=[blob])
    )
