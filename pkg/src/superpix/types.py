"""Core raster value types shared by every module.

All types are thin immutable wrappers around numpy arrays. Arrays are
copied on construction and marked read-only, so values can be shared
freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

# Reserved label value meaning "no region assigned yet".
UNLABELED = -1


def _frozen(arr: np.ndarray, dtype) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Image:
    """Dense H x W raster with 1 or 3 channels, values in [0, 255]."""

    data: np.ndarray  # (H, W, C) float64

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ValueError(f"image must be (H, W, 1|3), got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        object.__setattr__(self, "data", _frozen(arr, np.float64))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def pixel_count(self) -> int:
        return self.height * self.width

    def to_rgb(self) -> "Image":
        """Return a 3-channel view of this image (gray is replicated)."""
        if self.channels == 3:
            return self
        return Image(np.repeat(self.data, 3, axis=2))


@dataclass(frozen=True)
class LabImage:
    """CIELAB feature image: L in [0, 100], a/b roughly [-128, 127]."""

    data: np.ndarray  # (H, W, 3) float64

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"lab image must be (H, W, 3), got shape {arr.shape}")
        object.__setattr__(self, "data", _frozen(arr, np.float64))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class LabelMap:
    """Dense H x W map of region identifiers.

    Region ids are non-negative; UNLABELED (-1) marks pixels without a
    region. A map produced by enforce_connectivity has contiguous ids,
    each 4-connected.
    """

    labels: np.ndarray  # (H, W) int32

    def __post_init__(self):
        arr = np.asarray(self.labels)
        if arr.ndim != 2:
            raise ValueError(f"label map must be 2-d, got shape {arr.shape}")
        if arr.size and arr.min() < UNLABELED:
            raise ValueError("labels must be >= -1")
        object.__setattr__(self, "labels", _frozen(arr, np.int32))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def label_values(self) -> np.ndarray:
        """Distinct non-sentinel labels, sorted ascending."""
        vals = np.unique(self.labels)
        return vals[vals != UNLABELED]

    @property
    def num_labels(self) -> int:
        return int(self.label_values().size)

    def is_fully_labeled(self) -> bool:
        return bool((self.labels != UNLABELED).all())


@dataclass(frozen=True)
class BinaryMask:
    """Dense H x W boolean raster."""

    bits: np.ndarray  # (H, W) bool

    def __post_init__(self):
        arr = np.asarray(self.bits)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-d, got shape {arr.shape}")
        object.__setattr__(self, "bits", _frozen(arr, bool))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape

    @property
    def area(self) -> int:
        return int(self.bits.sum())


@dataclass(frozen=True)
class DistanceField:
    """Per-pixel non-negative distances in pixel units."""

    values: np.ndarray  # (H, W) float64

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"distance field must be 2-d, got shape {arr.shape}")
        if arr.size and arr.min() < 0:
            raise ValueError("distances must be non-negative")
        object.__setattr__(self, "values", _frozen(arr, np.float64))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class NoiseSpec:
    """Configuration for reproducible synthetic noise.

    gaussian: additive N(0, variance) per sample, clamped to [0, 255].
    salt_pepper: a `density` fraction of pixels forced to 0 or 255.
    """

    kind: Literal["gaussian", "salt_pepper"]
    variance: float = 0.0
    density: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("gaussian", "salt_pepper"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.variance < 0:
            raise ValueError("variance must be >= 0")
        if not 0.0 <= self.density <= 1.0:
            raise ValueError("density must be in [0, 1]")


def require_same_shape(*shapes: tuple[int, int]) -> None:
    first = shapes[0]
    for s in shapes[1:]:
        if s != first:
            raise ValueError(f"shape mismatch: {first} vs {s}")
