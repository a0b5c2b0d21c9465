"""Training-data pipeline: patch extraction, dihedral augmentation, and a
source-image-level train/holdout split.

The split happens before extraction so no source image contributes
patches to both sides.  Augmentation (horizontal/vertical flips, 90-degree
rotations, and their combinations -- the full dihedral group of 8 when
both flags are set) applies to training patches only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .image import GrayImage
from .imageio import load_pgm

__all__ = ["DatasetSpec", "PatchSet", "dihedral_variants", "extract_patches", "list_source_images"]


@dataclass
class DatasetSpec:
    source_dir: str
    patch_size: int = 96
    patches_per_image: int = 8
    flips: bool = True
    rotations: bool = True
    split_seed: int = 0
    holdout_fraction: float = 0.2
    max_patches: int | None = None  # cap on post-augmentation training patches

    def __post_init__(self):
        if self.patch_size < 1:
            raise ValueError("patch size must be >= 1")
        if self.patches_per_image < 1:
            raise ValueError("patches per image must be >= 1")
        if not 0.0 <= self.holdout_fraction < 1.0:
            raise ValueError("holdout fraction must be in [0, 1)")


@dataclass
class PatchSet:
    train: np.ndarray  # (K, 1, P, P)
    holdout: np.ndarray
    train_sources: list[str] = field(default_factory=list)
    holdout_sources: list[str] = field(default_factory=list)


def dihedral_variants(patch: np.ndarray, flips: bool, rotations: bool) -> list[np.ndarray]:
    """Augmentation orbit of one patch under the requested symmetries.

    flips only -> identity + horizontal + vertical flips; rotations only ->
    the four 90-degree rotations; both -> all 8 dihedral images.
    """
    variants = [patch]
    if rotations:
        variants = [np.rot90(patch, k) for k in range(4)]
    if flips:
        variants = variants + [np.fliplr(v) for v in variants]
        if not rotations:
            variants.append(np.flipud(patch))
    # drop duplicate views that arise for flips-only symmetric composition
    out, seen = [], set()
    for v in variants:
        key = v.tobytes()
        if key not in seen:
            seen.add(key)
            out.append(np.ascontiguousarray(v))
    return out


def list_source_images(source_dir: str) -> list[Path]:
    paths = sorted(Path(source_dir).glob("*.pgm"))
    if not paths:
        raise FileNotFoundError(f"no .pgm images in {source_dir!r}")
    return paths


def _random_patches(rng, pixels: np.ndarray, size: int, count: int) -> list[np.ndarray]:
    h, w = pixels.shape
    if h < size or w < size:
        raise ValueError(f"image {h}x{w} smaller than patch size {size}")
    patches = []
    for _ in range(count):
        top = int(rng.integers(0, h - size + 1))
        left = int(rng.integers(0, w - size + 1))
        patches.append(pixels[top : top + size, left : left + size])
    return patches


def extract_patches(spec: DatasetSpec, seed: int, images: list | None = None) -> PatchSet:
    """Extract seeded random patches from a directory of PGMs (or supplied
    GrayImages).  Deterministic given (spec, seed)."""
    if images is None:
        paths = list_source_images(spec.source_dir)
        names = [p.name for p in paths]
        pixel_arrays = [load_pgm(str(p)).pixels for p in paths]
    else:
        names = [f"image{i}" for i in range(len(images))]
        pixel_arrays = [img.pixels if isinstance(img, GrayImage) else np.asarray(img) for img in images]

    split_rng = np.random.default_rng(spec.split_seed)
    order = split_rng.permutation(len(names))
    n_holdout = int(round(spec.holdout_fraction * len(names)))
    if spec.holdout_fraction > 0 and n_holdout == 0 and len(names) > 1:
        n_holdout = 1
    holdout_idx = set(order[:n_holdout].tolist())

    rng = np.random.default_rng(seed)
    train, holdout = [], []
    train_sources, holdout_sources = [], []
    for i, (name, pixels) in enumerate(zip(names, pixel_arrays)):
        crops = _random_patches(rng, pixels, spec.patch_size, spec.patches_per_image)
        if i in holdout_idx:
            holdout.extend(crops)
            holdout_sources.append(name)
        else:
            for crop in crops:
                train.extend(dihedral_variants(crop, spec.flips, spec.rotations))
            train_sources.append(name)
    if spec.max_patches is not None and len(train) > spec.max_patches:
        keep = rng.permutation(len(train))[: spec.max_patches]
        train = [train[int(k)] for k in sorted(keep)]

    def stack(lst):
        if not lst:
            return np.zeros((0, 1, spec.patch_size, spec.patch_size))
        return np.stack(lst)[:, None].astype(np.float64)

    return PatchSet(stack(train), stack(holdout), train_sources, holdout_sources)
