"""Overlap metrics and a focal+dice diagnostic loss."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError
from .prompts import BBox
from .raster import BinaryMask, ProbMask

__all__ = ["dice", "iou", "box_iou", "LossParams", "focal_dice_loss"]


def _counts(pred: BinaryMask, gt: BinaryMask):
    if pred.values.shape != gt.values.shape:
        raise DomainError(
            f"mask metric: dimension mismatch {pred.values.shape} vs {gt.values.shape}")
    return kernels.mask_counts(pred.values, gt.values)


def dice(pred: BinaryMask, gt: BinaryMask) -> float:
    """2|P&G| / (|P| + |G|); 1.0 when both masks are empty."""
    inter, p, g = _counts(pred, gt)
    if p + g == 0:
        return 1.0
    return 2.0 * inter / (p + g)


def iou(pred: BinaryMask, gt: BinaryMask) -> float:
    """|P&G| / |P|+|G|-|P&G|; 1.0 when both masks are empty."""
    inter, p, g = _counts(pred, gt)
    union = p + g - inter
    if union == 0:
        return 1.0
    return inter / union


def box_iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes, continuous coordinates."""
    inter = a.intersection_area(b)
    union = a.area + b.area - inter
    return inter / union if union > 0.0 else 0.0


@dataclass(frozen=True)
class LossParams:
    alpha: float = 0.25
    gamma: float = 2.0
    epsilon: float = 1e-7

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise DomainError(f"LossParams: alpha must lie in (0, 1], got {self.alpha}")
        if not (math.isfinite(self.gamma) and self.gamma >= 0.0):
            raise DomainError(f"LossParams: gamma must be >= 0, got {self.gamma}")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0.0):
            raise DomainError(f"LossParams: epsilon must be > 0, got {self.epsilon}")


def focal_dice_loss(prob: ProbMask, gt: BinaryMask,
                    params: LossParams = LossParams()) -> float:
    """Binary focal term plus soft dice term, natural log.

    The focal term averages -alpha * (1-q)^gamma * log(q) over pixels,
    where q is the predicted probability of the true label (clamped to
    [eps, 1-eps]). The dice term is 1 - 2*sum(p*g) / (sum(p) + sum(g)
    + eps). Perfect predictions score approximately 0.
    """
    p = prob.values
    if p.shape != gt.values.shape:
        raise DomainError(
            f"focal_dice_loss: dimension mismatch {p.shape} vs {gt.values.shape}")
    g = gt.values.astype(np.float64)
    q = np.where(g == 1.0, p, 1.0 - p)
    q = np.clip(q, params.epsilon, 1.0 - params.epsilon)
    focal = -params.alpha * float(np.mean((1.0 - q) ** params.gamma * np.log(q)))
    dice_term = 1.0 - 2.0 * float(np.sum(p * g)) / (float(p.sum()) + float(g.sum()) + params.epsilon)
    return focal + dice_term
