"""Raster containers and entropy/scalarization primitives.

All three mask types are immutable: construction copies the input array
and freezes it, so instances can be shared across threads and cached
safely. Arrays are (height, width), C order, one value per pixel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError

__all__ = [
    "ProbMask",
    "BinaryMask",
    "UncertaintyMap",
    "ImageRaster",
    "binary_entropy",
    "entropy_map",
    "scalar_uncertainty",
    "threshold_mask",
]


def _frozen_2d(values, dtype, what):
    arr = np.array(values, dtype=dtype, order="C", copy=True)
    if arr.ndim != 2:
        raise DomainError(f"{what}: expected a 2-d array, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DomainError(f"{what}: dimensions must be at least 1x1, got {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ProbMask:
    """Per-pixel foreground probability in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen_2d(self.values, np.float64, "ProbMask")
        if not np.isfinite(arr).all():
            raise DomainError("ProbMask: values must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise DomainError("ProbMask: values must lie in [0, 1]")
        object.__setattr__(self, "values", arr)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Per-pixel {0, 1} labels, stored as uint8."""

    values: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.values)
        if raw.dtype == np.bool_:
            raw = raw.astype(np.uint8)
        if not np.issubdtype(raw.dtype, np.integer):
            raise DomainError("BinaryMask: values must be integers over {0, 1}")
        if raw.size and (raw.min() < 0 or raw.max() > 1):
            raise DomainError("BinaryMask: values must be 0 or 1")
        arr = _frozen_2d(raw, np.uint8, "BinaryMask")
        object.__setattr__(self, "values", arr)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class UncertaintyMap:
    """Per-pixel normalized entropy in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen_2d(self.values, np.float64, "UncertaintyMap")
        if not np.isfinite(arr).all():
            raise DomainError("UncertaintyMap: values must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise DomainError("UncertaintyMap: values must lie in [0, 1]")
        object.__setattr__(self, "values", arr)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class ImageRaster:
    """An 8-bit grayscale image."""

    values: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.values)
        if not np.issubdtype(raw.dtype, np.integer):
            raise DomainError("ImageRaster: values must be 8-bit integers")
        if raw.size and (raw.min() < 0 or raw.max() > 255):
            raise DomainError("ImageRaster: values must lie in [0, 255]")
        arr = _frozen_2d(raw, np.uint8, "ImageRaster")
        object.__setattr__(self, "values", arr)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


def binary_entropy(p: float) -> float:
    """Binary entropy of a probability, log base 2, normalized to [0, 1].

    0*log(0) is taken as 0, so the endpoints evaluate to exactly 0.
    """
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"binary_entropy: p must lie in [0, 1], got {p}")
    return float(kernels.entropy(np.array([p]))[0])


def entropy_map(mask: ProbMask) -> UncertaintyMap:
    """Per-pixel binary entropy of a probability mask."""
    return UncertaintyMap(kernels.entropy(mask.values))


def scalar_uncertainty(umap: UncertaintyMap) -> float:
    """Whole-image mean of an uncertainty map."""
    return float(umap.values.mean())


def threshold_mask(mask: ProbMask, t: float) -> BinaryMask:
    """Binarize a probability mask: pixel = 1 iff value >= t."""
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"threshold_mask: t must lie in [0, 1], got {t}")
    return BinaryMask((mask.values >= t).astype(np.uint8))
