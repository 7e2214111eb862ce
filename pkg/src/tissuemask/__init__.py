"""Tissue segmentation toolkit for histopathology whole-slide thumbnails."""

from . import contours, dataset, evaluation, imaging, methods, phantom, preprocess
from .methods import (
    FesiParams,
    HandcraftedParams,
    HistomicsParams,
    MaskResult,
    MethodSpec,
    TissueLocParams,
    fesi_mask,
    handcrafted_mask,
    histomics_like_mask,
    make_spec,
    otsu_mask,
    segment,
    tissueloc_mask,
)

__version__ = "0.1.0"
