"""Synthetic 2-D classification tasks: Gaussian blobs and two spirals.

Both generators are fully seeded. Blob centers depend only on the seed (not
on the split or the point count), so train and test splits of the same spec
are draws from the same mixture.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["BlobSpec", "SpiralSpec", "Dataset", "make_blobs", "make_spirals", "blob_centers"]

# seed-sequence namespace tags, kept distinct across the package
_TAG_CENTERS = 0
_TAG_TRAIN = 1
_TAG_TEST = 2


@dataclass(frozen=True)
class BlobSpec:
    classes: int = 8
    per_class: int = 500
    center_spread: float = 5.0
    noise: float = 1.0
    seed: int = 7

    def __post_init__(self):
        if self.classes < 2:
            raise ValueError(f"need at least 2 classes, got {self.classes!r}")
        if self.per_class < 1:
            raise ValueError(f"per_class must be positive, got {self.per_class!r}")
        if self.center_spread <= 0.0:
            raise ValueError(f"center_spread must be positive, got {self.center_spread!r}")
        if self.noise < 0.0:
            raise ValueError(f"noise must be non-negative, got {self.noise!r}")


@dataclass(frozen=True)
class SpiralSpec:
    per_class: int = 500
    noise: float = 0.0
    turns: float = 1.75
    seed: int = 7

    def __post_init__(self):
        if self.per_class < 1:
            raise ValueError(f"per_class must be positive, got {self.per_class!r}")
        if self.noise < 0.0:
            raise ValueError(f"noise must be non-negative, got {self.noise!r}")
        if self.turns <= 0.0:
            raise ValueError(f"turns must be positive, got {self.turns!r}")


@dataclass
class Dataset:
    inputs: np.ndarray   # (n, 2) float64
    labels: np.ndarray   # (n,) int64
    split: str           # "train" or "test"
    spec: object         # the generator spec this came from

    def __post_init__(self):
        if len(self.inputs) != len(self.labels):
            raise ValueError("inputs and labels must have matching lengths")
        if len(self.inputs) == 0:
            raise ValueError("dataset must be non-empty")

    @property
    def n(self) -> int:
        return len(self.labels)


def _split_tag(split: str) -> int:
    if split == "train":
        return _TAG_TRAIN
    if split == "test":
        return _TAG_TEST
    raise ValueError(f"split must be 'train' or 'test', got {split!r}")


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, tag))))


def blob_centers(spec: BlobSpec) -> np.ndarray:
    """Class centers, a function of the seed alone so splits share them."""
    rng = _rng(spec.seed, _TAG_CENTERS)
    return spec.center_spread * rng.standard_normal((spec.classes, 2))


def make_blobs(spec: BlobSpec, split: str = "train") -> Dataset:
    centers = blob_centers(spec)
    rng = _rng(spec.seed, _split_tag(split))
    labels = np.repeat(np.arange(spec.classes, dtype=np.int64), spec.per_class)
    points = centers[labels] + spec.noise * rng.standard_normal((len(labels), 2))
    return Dataset(points, labels, split, spec)


def make_spirals(spec: SpiralSpec, split: str = "train") -> Dataset:
    """Two interleaved spirals, class 1 rotated half a turn from class 0.

    With noise = 0 the points sit exactly on the parametric arcs
    r = 0.2 + 0.8 u, theta = 2 pi turns u + class pi, for u in [0, 1).
    """
    rng = _rng(spec.seed, _split_tag(split))
    labels = np.repeat(np.arange(2, dtype=np.int64), spec.per_class)
    u = rng.random(len(labels))
    r = 0.2 + 0.8 * u
    theta = 2.0 * np.pi * spec.turns * u + labels * np.pi
    points = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
    points += spec.noise * rng.standard_normal(points.shape)
    return Dataset(points, labels, split, spec)
