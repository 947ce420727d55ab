"""Multi-prompt aggregation: mean prediction plus entropy uncertainty.

One backend call per box, all sharing the point list; the per-box masks
are averaged pixel-wise and the mean's binary entropy becomes the
uncertainty map. Per-box masks are kept on the result so disagreement
regions can be audited.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, SegmenterError
from .prompts import PromptSet
from .raster import (
    ImageRaster,
    ProbMask,
    UncertaintyMap,
    entropy_map,
    scalar_uncertainty,
)
from .segmenter import Segmenter

__all__ = ["AggregateResult", "aggregate", "ugmp"]


@dataclass(frozen=True, eq=False)
class AggregateResult:
    mean_mask: ProbMask
    uncertainty: UncertaintyMap
    per_box_masks: tuple[ProbMask, ...]
    scalar_u: float


def aggregate(masks: Sequence[ProbMask]) -> ProbMask:
    """Per-pixel arithmetic mean of probability masks."""
    masks = list(masks)
    if not masks:
        raise DomainError("aggregate: at least one mask is required")
    shape = masks[0].values.shape
    for i, m in enumerate(masks):
        if m.values.shape != shape:
            raise DomainError(f"aggregate: mask {i} is {m.values.shape}, "
                              f"expected {shape}")
    if len(masks) == 1:
        return masks[0]
    mean = np.mean([m.values for m in masks], axis=0)
    # the mean of values in [0, 1] can stray an ulp past 1.0
    return ProbMask(np.clip(mean, 0.0, 1.0))


def ugmp(image: ImageRaster, prompt_set: PromptSet,
         backend: Segmenter) -> AggregateResult:
    """Run the backend once per box and fold the masks into one result.

    Backend failures propagate annotated with the failing box index.
    """
    per_box = []
    for i, box in enumerate(prompt_set.boxes):
        try:
            per_box.append(backend.segment_one(image, box, prompt_set.points))
        except SegmenterError as exc:
            raise type(exc)(f"box index {i}: {exc}") from exc
    mean_mask = aggregate(per_box)
    uncertainty = entropy_map(mean_mask)
    return AggregateResult(mean_mask=mean_mask, uncertainty=uncertainty,
                           per_box_masks=tuple(per_box),
                           scalar_u=scalar_uncertainty(uncertainty))
