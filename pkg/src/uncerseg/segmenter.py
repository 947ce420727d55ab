"""The promptable-segmenter interface and the synthetic oracle backend.

A segmenter maps (image, one box, shared points) to a per-pixel
foreground-probability mask of the same dimensions. The oracle backend
answers from a known ground-truth mask with accuracy that degrades as
the box covers less of the target, which is exactly the behavior the
refinement loop needs in order to be testable without model weights.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import DomainError
from .prompts import BBox, PointPrompt
from .raster import BinaryMask, ImageRaster, ProbMask

__all__ = ["Segmenter", "OracleParams", "OracleSegmenter", "oracle_segment"]


class Segmenter(abc.ABC):
    """Abstract backend: one probability mask per (box, points) query.

    Implementations must be deterministic for fixed backend state and
    fixed inputs, must return masks matching the image dimensions, and
    must tolerate concurrent segment_one calls.
    """

    supports_points: bool = True
    max_boxes_per_call: int = 1

    @abc.abstractmethod
    def segment_one(self, image: ImageRaster, box: BBox,
                    points: Sequence[PointPrompt]) -> ProbMask:
        """Segment the target indicated by one box and the shared points."""


@dataclass(frozen=True)
class OracleParams:
    """Constants of the synthetic backend.

    a1/a0 are the foreground/background probabilities inside the box;
    outside the box both are attenuated by e_out. Positive points add a
    Gaussian bump of amplitude b_p and radius rho_frac * min(W, H) on
    foreground pixels. Defaults keep the 0.5 decision boundary tied to
    box coverage: a1 > 0.5 while a1 * e_out < 0.5.
    """

    a1: float = 0.9
    a0: float = 0.15
    e_out: float = 0.1
    b_p: float = 0.6
    rho_frac: float = 0.05

    def __post_init__(self):
        for name in ("a1", "a0", "e_out", "b_p"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise DomainError(f"OracleParams: {name} must lie in [0, 1], got {v}")
        if not (math.isfinite(self.rho_frac) and self.rho_frac > 0.0):
            raise DomainError(f"OracleParams: rho_frac must be > 0, got {self.rho_frac}")
        if not self.a1 > 0.5:
            raise DomainError(f"OracleParams: a1 must exceed 0.5, got {self.a1}")
        if not self.a0 < 0.5:
            raise DomainError(f"OracleParams: a0 must be below 0.5, got {self.a0}")
        if not self.a1 * self.e_out < 0.5:
            raise DomainError(
                f"OracleParams: a1 * e_out must stay below 0.5, got {self.a1 * self.e_out}")


def _check_prompts(width: int, height: int, box: BBox,
                   points: Sequence[PointPrompt]) -> None:
    if not box.contained_in((width, height)):
        raise DomainError(f"segment: box {box.as_tuple()} exceeds image bounds "
                          f"({width}x{height})")
    for p in points:
        if not (0.0 <= p.x <= width and 0.0 <= p.y <= height):
            raise DomainError(f"segment: point ({p.x}, {p.y}) exceeds image bounds "
                              f"({width}x{height})")


def oracle_segment(gt: BinaryMask, box: BBox, points: Sequence[PointPrompt],
                   params: OracleParams = OracleParams()) -> ProbMask:
    """Synthetic probabilities for a known ground truth.

    Inside the box, foreground pixels score a1 and background a0;
    outside, both are multiplied by e_out. Each positive point adds a
    Gaussian bump on foreground pixels only, so point placement recovers
    missed target area without ever brightening background. The result
    is clamped to [0, 1]. Pure: identical inputs give identical output.
    """
    _check_prompts(gt.width, gt.height, box, points)
    positives = [(p.x, p.y) for p in points if p.label == "positive"]
    pts = np.array(positives, dtype=np.float64).reshape(-1, 2)
    rho = params.rho_frac * min(gt.width, gt.height)
    vals = kernels.oracle_probs(gt.values, box.as_tuple(), pts,
                                params.a1, params.a0, params.e_out,
                                params.b_p, rho)
    return ProbMask(vals)


class OracleSegmenter(Segmenter):
    """Deterministic verification backend built around a known mask."""

    supports_points = True
    max_boxes_per_call = 1

    def __init__(self, gt: BinaryMask, params: OracleParams | None = None):
        self._gt = gt
        self._params = params if params is not None else OracleParams()

    @property
    def params(self) -> OracleParams:
        return self._params

    def segment_one(self, image: ImageRaster, box: BBox,
                    points: Sequence[PointPrompt]) -> ProbMask:
        if image is not None and (image.width != self._gt.width
                                  or image.height != self._gt.height):
            raise DomainError(
                f"OracleSegmenter: image is {image.width}x{image.height} but the "
                f"ground truth is {self._gt.width}x{self._gt.height}")
        return oracle_segment(self._gt, box, points, self._params)
