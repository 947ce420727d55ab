"""Uncertainty-guided prompt refinement.

The loop: segment with jittered copies of the initial box, threshold
the resulting uncertainty map into a region, enclose that region in a
box, jitter it into refined box prompts, add the highest-uncertainty
pixels as positive points, segment again, and keep the refined result
only when the whole-image mean uncertainty strictly decreased. Ties
keep the baseline, so reported uncertainty never increases.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import kernels, seeds
from .aggregate import ugmp
from .errors import DomainError, EmptyUncertaintyError, SegmenterError
from .prompts import (
    BBox,
    JitterSpec,
    PointPrompt,
    PromptSet,
    gen_box_set,
)
from .raster import BinaryMask, ImageRaster, ProbMask, UncertaintyMap
from .segmenter import Segmenter

__all__ = [
    "RefineConfig",
    "RoundRecord",
    "RefineTrace",
    "uncertainty_region",
    "edge_bbox",
    "top_k_points",
    "refine_prompts",
    "medsam_u",
]

# distinct seed streams for the initial jitter and each round's refined jitter
_STREAM_INITIAL = 1
_STREAM_REFINED = 2


@dataclass(frozen=True)
class RefineConfig:
    """All pipeline knobs.

    tau is the uncertainty-region cut as a fraction of the map maximum;
    min_point_separation spaces the selected points (Chebyshev);
    binarize_threshold is used when masks are binarized for metrics.
    """

    n_boxes: int = 3
    sigma_frac: float = 0.05
    k_points: int = 10
    tau: float = 0.5
    min_point_separation: int = 5
    rounds: int = 1
    binarize_threshold: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n_boxes < 1:
            raise DomainError(f"RefineConfig: n_boxes must be >= 1, got {self.n_boxes}")
        if not (0.0 < self.tau <= 1.0):
            raise DomainError(f"RefineConfig: tau must lie in (0, 1], got {self.tau}")
        if self.rounds < 1:
            raise DomainError(f"RefineConfig: rounds must be >= 1, got {self.rounds}")
        if self.k_points < 0:
            raise DomainError(f"RefineConfig: k_points must be >= 0, got {self.k_points}")
        if self.sigma_frac < 0.0:
            raise DomainError(f"RefineConfig: sigma_frac must be >= 0, got {self.sigma_frac}")
        if self.min_point_separation < 0:
            raise DomainError(
                f"RefineConfig: min_point_separation must be >= 0, got {self.min_point_separation}")
        if not (0.0 <= self.binarize_threshold <= 1.0):
            raise DomainError(
                f"RefineConfig: binarize_threshold must lie in [0, 1], got {self.binarize_threshold}")


@dataclass(frozen=True, eq=False)
class RoundRecord:
    """What one refinement round saw and decided."""

    index: int
    prompts: PromptSet
    scalar_u: float
    mean_mask: ProbMask
    refined_prompts: PromptSet | None
    refined_scalar_u: float | None
    refined_mean_mask: ProbMask | None
    accepted: bool
    note: str = ""

    def to_dict(self) -> dict:
        from .prompts import prompt_set_to_dict
        return {
            "index": self.index,
            "prompts": prompt_set_to_dict(self.prompts),
            "scalar_u": self.scalar_u,
            "refined_prompts": (prompt_set_to_dict(self.refined_prompts)
                                if self.refined_prompts is not None else None),
            "refined_scalar_u": self.refined_scalar_u,
            "accepted": self.accepted,
            "note": self.note,
        }


@dataclass(frozen=True, eq=False)
class RefineTrace:
    """The full decision record of one pipeline invocation."""

    initial_box: BBox
    initial_mask: ProbMask
    initial_uncertainty: UncertaintyMap
    initial_scalar_u: float
    rounds: tuple[RoundRecord, ...]
    final_source: str
    final_scalar_u: float
    backend_calls: int

    @property
    def accepted_any(self) -> bool:
        return self.final_source != "initial"

    def to_dict(self, files: dict | None = None) -> dict:
        return {
            "initial_box": list(self.initial_box.as_tuple()),
            "initial_scalar_u": self.initial_scalar_u,
            "rounds": [r.to_dict() for r in self.rounds],
            "final_source": self.final_source,
            "final_scalar_u": self.final_scalar_u,
            "backend_calls": self.backend_calls,
            "files": dict(files) if files else {},
        }


def uncertainty_region(u: UncertaintyMap, tau: float) -> BinaryMask:
    """Pixels at or above tau times the map maximum.

    An identically zero map yields an all-zero region rather than the
    all-ones region the bare comparison would produce.
    """
    tau = float(tau)
    if not (0.0 < tau <= 1.0):
        raise DomainError(f"uncertainty_region: tau must lie in (0, 1], got {tau}")
    peak = float(u.values.max())
    if peak == 0.0:
        return BinaryMask(np.zeros_like(u.values, dtype=np.uint8))
    return BinaryMask((u.values >= tau * peak).astype(np.uint8))


def edge_bbox(region: BinaryMask) -> BBox:
    """Enclosing box of a region's nonzero pixels (pixel i spans [i, i+1))."""
    ys, xs = np.nonzero(region.values)
    if xs.size == 0:
        raise EmptyUncertaintyError("edge_bbox: the region has no pixels")
    return BBox(float(xs.min()), float(ys.min()),
                float(xs.max() + 1), float(ys.max() + 1))


def top_k_points(u: UncertaintyMap, k: int, d_min: int) -> list[PointPrompt]:
    """Up to k positive points at the highest-uncertainty pixel centers.

    Selection is greedy in descending value order with ties broken by
    row-major pixel index; a candidate within Chebyshev distance < d_min
    of an already selected point is skipped. Fewer than k points come
    back when the map is exhausted.
    """
    if k < 0:
        raise DomainError(f"top_k_points: k must be >= 0, got {k}")
    if k == 0:
        return []
    flat = u.values.ravel()
    order = np.lexsort((np.arange(flat.size), -flat))
    chosen = kernels.topk_greedy(flat, order, u.width, k, int(d_min))
    out = []
    for idx in chosen:
        y, x = divmod(int(idx), u.width)
        out.append(PointPrompt(x + 0.5, y + 0.5, "positive"))
    return out


def refine_prompts(u: UncertaintyMap, cfg: RefineConfig,
                   bounds: tuple[int, int]) -> PromptSet:
    """Refined prompts for one round: jittered enclosing box plus points.

    Raises EmptyUncertaintyError when the map is identically zero, in
    which case there is nothing to refine.
    """
    region = uncertainty_region(u, cfg.tau)
    box = edge_bbox(region)
    spec = JitterSpec(cfg.sigma_frac, cfg.seed)
    boxes = gen_box_set(box, cfg.n_boxes, spec, bounds)
    points = top_k_points(u, cfg.k_points, cfg.min_point_separation)
    return PromptSet(tuple(boxes), tuple(points))


def medsam_u(image: ImageRaster, b_init: BBox, cfg: RefineConfig,
             backend: Segmenter, points: Sequence[PointPrompt] = ()
             ) -> tuple[ProbMask, UncertaintyMap, RefineTrace]:
    """The full refinement pipeline for one image.

    Returns (final mask, final uncertainty, trace). The final pair is
    the refined result of the last accepted round, or the unrefined
    baseline when no round was accepted. Refined prompts replace any
    caller-supplied points. With rounds > 1, each accepted round seeds
    the next; the loop stops at the first rejection. Backend failures
    raise with the partial trace attached as exc.trace.
    """
    bounds = (image.width, image.height)
    if not b_init.contained_in(bounds):
        raise DomainError(f"medsam_u: initial box {b_init.as_tuple()} exceeds "
                          f"image bounds {bounds}")

    def _partial_trace(rounds_rec, current, current_source, calls):
        return RefineTrace(
            initial_box=b_init,
            initial_mask=initial.mean_mask if initial is not None else None,
            initial_uncertainty=initial.uncertainty if initial is not None else None,
            initial_scalar_u=initial.scalar_u if initial is not None else float("nan"),
            rounds=tuple(rounds_rec),
            final_source=current_source,
            final_scalar_u=current.scalar_u if current is not None else float("nan"),
            backend_calls=calls,
        )

    initial = None
    calls = 0
    init_spec = JitterSpec(cfg.sigma_frac, seeds.derive(cfg.seed, _STREAM_INITIAL))
    init_boxes = gen_box_set(b_init, cfg.n_boxes, init_spec, bounds)
    init_prompts = PromptSet(tuple(init_boxes), tuple(points))
    try:
        initial = ugmp(image, init_prompts, backend)
    except SegmenterError as exc:
        exc.trace = _partial_trace([], None, "initial", calls)
        raise
    calls += cfg.n_boxes

    current = initial
    current_prompts = init_prompts
    current_source = "initial"
    rounds_rec: list[RoundRecord] = []

    for r in range(cfg.rounds):
        round_cfg = replace(cfg, seed=seeds.derive(cfg.seed, _STREAM_REFINED, r))
        try:
            refined_prompts = refine_prompts(current.uncertainty, round_cfg, bounds)
        except EmptyUncertaintyError:
            rounds_rec.append(RoundRecord(
                index=r, prompts=current_prompts, scalar_u=current.scalar_u,
                mean_mask=current.mean_mask, refined_prompts=None,
                refined_scalar_u=None, refined_mean_mask=None, accepted=False,
                note="refinement skipped: uncertainty map has no nonzero pixels"))
            break
        try:
            refined = ugmp(image, refined_prompts, backend)
        except SegmenterError as exc:
            exc.trace = _partial_trace(rounds_rec, current, current_source, calls)
            raise
        calls += round_cfg.n_boxes
        accepted = refined.scalar_u < current.scalar_u
        rounds_rec.append(RoundRecord(
            index=r, prompts=current_prompts, scalar_u=current.scalar_u,
            mean_mask=current.mean_mask, refined_prompts=refined_prompts,
            refined_scalar_u=refined.scalar_u, refined_mean_mask=refined.mean_mask,
            accepted=accepted))
        if not accepted:
            break
        current = refined
        current_prompts = refined_prompts
        current_source = f"round {r}"

    trace = RefineTrace(
        initial_box=b_init,
        initial_mask=initial.mean_mask,
        initial_uncertainty=initial.uncertainty,
        initial_scalar_u=initial.scalar_u,
        rounds=tuple(rounds_rec),
        final_source=current_source,
        final_scalar_u=current.scalar_u,
        backend_calls=calls,
    )
    return current.mean_mask, current.uncertainty, trace
