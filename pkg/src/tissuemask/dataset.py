"""Corpus ingestion: image-mask pairing, manifests, deterministic folds."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import (
    DimensionMismatchError,
    DuplicateStemError,
    ManifestParseError,
    TooFewItemsError,
)
from .io import read_image, read_mask
from .rng import shuffled

__all__ = [
    "DatasetItem",
    "FoldAssignment",
    "scan_pairs",
    "load_manifest",
    "assign_folds",
    "load_item",
    "MASK_SUFFIX",
]

MASK_SUFFIX = "_mask"
IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg")


@dataclass
class DatasetItem:
    id: str
    image_path: Optional[Path] = None
    mask_path: Optional[Path] = None
    organ: Optional[str] = None


@dataclass
class FoldAssignment:
    k: int
    seed: int
    mapping: dict = field(default_factory=dict)  # item id -> fold index

    def fold_sizes(self) -> list[int]:
        sizes = [0] * self.k
        for f in self.mapping.values():
            sizes[f] += 1
        return sizes

    def items_in_fold(self, fold: int) -> list[str]:
        return sorted(i for i, f in self.mapping.items() if f == fold)


def scan_pairs(image_dir, mask_dir=None, mask_suffix: str = MASK_SUFFIX):
    """Pair image files with <stem><suffix>.png masks, sorted by id.

    Items without a mask are kept with mask_path None.  Two images with
    the same stem (different extensions) raise DuplicateStemError.
    """
    image_dir = Path(image_dir)
    mask_dir = Path(mask_dir) if mask_dir is not None else image_dir
    items = {}
    for path in sorted(image_dir.iterdir()):
        if path.suffix.lower() not in IMAGE_EXTENSIONS:
            continue
        stem = path.stem
        if stem.endswith(mask_suffix):
            continue
        if stem in items:
            raise DuplicateStemError(
                f"{stem}: {items[stem].image_path.name} and {path.name}"
            )
        mask_path = mask_dir / f"{stem}{mask_suffix}.png"
        items[stem] = DatasetItem(
            id=stem,
            image_path=path,
            mask_path=mask_path if mask_path.exists() else None,
        )
    return [items[k] for k in sorted(items)]


def load_manifest(path):
    """GDC-style TSV: header row with at least id and filename columns."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ManifestParseError(1, "empty manifest")
    header = lines[0].rstrip("\n").split("\t")
    try:
        id_col = header.index("id")
        file_col = header.index("filename")
    except ValueError:
        raise ManifestParseError(1, "header must contain 'id' and 'filename'")
    organ_col = header.index("organ") if "organ" in header else None
    items = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split("\t")
        if len(cells) <= max(id_col, file_col):
            raise ManifestParseError(lineno, "missing columns")
        item_id = cells[id_col].strip()
        filename = cells[file_col].strip()
        if not item_id:
            raise ManifestParseError(lineno, "missing id")
        if not filename:
            raise ManifestParseError(lineno, "missing filename")
        organ = None
        if organ_col is not None and len(cells) > organ_col:
            organ = cells[organ_col].strip() or None
        items.append(
            DatasetItem(id=item_id, image_path=Path(filename), organ=organ)
        )
    return items


def assign_folds(items, k: int = 5, seed: int = 0) -> FoldAssignment:
    """Seeded shuffle (portable LCG, see rng module) then round-robin.

    Deterministic across platforms; fold sizes differ by at most one.
    """
    if k < 2:
        raise TooFewItemsError("k must be >= 2")
    ids = [it.id if isinstance(it, DatasetItem) else str(it) for it in items]
    if len(ids) < k:
        raise TooFewItemsError(f"{len(ids)} items < {k} folds")
    order = shuffled(sorted(ids), seed)
    mapping = {item_id: i % k for i, item_id in enumerate(order)}
    return FoldAssignment(k=k, seed=seed, mapping=mapping)


def load_item(item: DatasetItem):
    """Decode an item's image (and mask, when present) and validate dims."""
    img = read_image(item.image_path)
    if item.mask_path is None:
        return img, None
    mask = read_mask(item.mask_path)
    if img.shape[:2] != mask.shape:
        raise DimensionMismatchError(
            f"{item.id}: image {img.shape[:2]} vs mask {mask.shape}"
        )
    return img, mask
