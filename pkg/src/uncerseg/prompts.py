"""Prompt data model, box jittering, and prompt fabrication helpers.

Coordinates are continuous pixel space: pixel (i, j) occupies the unit
square [i, i+1) x [j, j+1) and its center sits at (i + 0.5, j + 0.5).
Image bounds are the rectangle [0, width] x [0, height].

Everything here is deterministic: each operation takes an explicit seed
(and, where a sequence of draws is needed, a draw index), so concurrent
callers never share generator state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    EmptyForegroundError,
    GenerationFailedError,
    InsufficientForegroundError,
)
from .raster import BinaryMask
from .seeds import rng_for

__all__ = [
    "BBox",
    "PointPrompt",
    "PromptSet",
    "JitterSpec",
    "clamp_box",
    "perturb_box",
    "gen_box_set",
    "tight_bbox",
    "degraded_box",
    "sample_positive_points",
    "prompt_set_to_dict",
    "prompt_set_from_dict",
]

POSITIVE = "positive"
NEGATIVE = "negative"


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box with positive area, corners in pixel space."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        coords = tuple(float(c) for c in
                       (self.x_min, self.y_min, self.x_max, self.y_max))
        if not all(math.isfinite(c) for c in coords):
            raise DomainError(f"BBox: coordinates must be finite, got {coords}")
        x0, y0, x1, y1 = coords
        if not (x0 < x1 and y0 < y1):
            raise DomainError(f"BBox: requires x_min < x_max and y_min < y_max, got {coords}")
        object.__setattr__(self, "x_min", x0)
        object.__setattr__(self, "y_min", y0)
        object.__setattr__(self, "x_max", x1)
        object.__setattr__(self, "y_max", y1)

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    def intersection_area(self, other: "BBox") -> float:
        ix = min(self.x_max, other.x_max) - max(self.x_min, other.x_min)
        iy = min(self.y_max, other.y_max) - max(self.y_min, other.y_min)
        if ix <= 0.0 or iy <= 0.0:
            return 0.0
        return ix * iy

    def contained_in(self, bounds: tuple[int, int]) -> bool:
        w, h = bounds
        return (self.x_min >= 0.0 and self.y_min >= 0.0
                and self.x_max <= w and self.y_max <= h)


@dataclass(frozen=True)
class PointPrompt:
    """A labeled point; positive marks foreground."""

    x: float
    y: float
    label: str = POSITIVE

    def __post_init__(self):
        x, y = float(self.x), float(self.y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise DomainError(f"PointPrompt: coordinates must be finite, got ({self.x}, {self.y})")
        if self.label not in (POSITIVE, NEGATIVE):
            raise DomainError(f"PointPrompt: label must be '{POSITIVE}' or '{NEGATIVE}', got {self.label!r}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class PromptSet:
    """The prompt bundle fed to a segmenter: boxes plus shared points."""

    boxes: tuple[BBox, ...]
    points: tuple[PointPrompt, ...] = ()

    def __post_init__(self):
        boxes = tuple(self.boxes)
        points = tuple(self.points)
        if len(boxes) < 1:
            raise DomainError("PromptSet: at least one box is required")
        if not all(isinstance(b, BBox) for b in boxes):
            raise DomainError("PromptSet: boxes must be BBox instances")
        if not all(isinstance(p, PointPrompt) for p in points):
            raise DomainError("PromptSet: points must be PointPrompt instances")
        object.__setattr__(self, "boxes", boxes)
        object.__setattr__(self, "points", points)


@dataclass(frozen=True)
class JitterSpec:
    """Gaussian box perturbation: sigma = sigma_frac * box side length."""

    sigma_frac: float
    seed: int

    def __post_init__(self):
        sf = float(self.sigma_frac)
        if not (math.isfinite(sf) and sf >= 0.0):
            raise DomainError(f"JitterSpec: sigma_frac must be >= 0, got {self.sigma_frac}")
        object.__setattr__(self, "sigma_frac", sf)
        object.__setattr__(self, "seed", int(self.seed))


def clamp_box(x0: float, y0: float, x1: float, y1: float,
              bounds: tuple[int, int]) -> BBox:
    """Clamp corners into bounds, expanding 1 px on any collapsed axis."""
    w, h = bounds
    x0 = min(max(x0, 0.0), float(w))
    x1 = min(max(x1, 0.0), float(w))
    y0 = min(max(y0, 0.0), float(h))
    y1 = min(max(y1, 0.0), float(h))
    if x1 <= x0:
        x0 = max(0.0, x0 - 1.0)
        x1 = min(float(w), x0 + 1.0)
    if y1 <= y0:
        y0 = max(0.0, y0 - 1.0)
        y1 = min(float(h), y0 + 1.0)
    return BBox(x0, y0, x1, y1)


def perturb_box(b: BBox, spec: JitterSpec, bounds: tuple[int, int],
                draw_index: int) -> BBox:
    """One jittered copy of a box.

    Each corner coordinate receives an independent N(0, sigma) offset
    with sigma = sigma_frac times the matching box side length, then the
    box is clamped into bounds. Deterministic given (spec.seed,
    draw_index).
    """
    if not b.contained_in(bounds):
        raise DomainError(f"perturb_box: box {b.as_tuple()} exceeds bounds {bounds}")
    if spec.sigma_frac == 0.0:
        return b
    rng = rng_for(spec.seed, int(draw_index))
    d = rng.standard_normal(4)
    sx = spec.sigma_frac * b.width
    sy = spec.sigma_frac * b.height
    return clamp_box(b.x_min + d[0] * sx, b.y_min + d[1] * sy,
                     b.x_max + d[2] * sx, b.y_max + d[3] * sy, bounds)


def gen_box_set(b_init: BBox, n: int, spec: JitterSpec,
                bounds: tuple[int, int]) -> list[BBox]:
    """n jittered copies of b_init, one per draw index 0..n-1."""
    if n < 1:
        raise DomainError(f"gen_box_set: n must be >= 1, got {n}")
    return [perturb_box(b_init, spec, bounds, i) for i in range(n)]


def tight_bbox(gt: BinaryMask) -> BBox:
    """Smallest box containing every foreground pixel of a mask."""
    ys, xs = np.nonzero(gt.values)
    if xs.size == 0:
        raise EmptyForegroundError("tight_bbox: mask has no foreground pixels")
    return BBox(float(xs.min()), float(ys.min()),
                float(xs.max() + 1), float(ys.max() + 1))


def _box_iou(a: BBox, b: BBox) -> float:
    inter = a.intersection_area(b)
    union = a.area + b.area - inter
    return inter / union if union > 0.0 else 0.0


def degraded_box(gt_box: BBox, target_iou: float, seed: int,
                 bounds: tuple[int, int], max_proposals: int = 10000) -> BBox:
    """A box whose IoU with gt_box lies within target_iou +/- 0.02.

    Found by seeded rejection over shift+scale proposals whose spread
    grows with the requested degradation q = 1 - target_iou: side
    scales are drawn from U(1 - 0.9q, 1 + 0.1q) (shrink-biased, so
    low-quality boxes tend to miss parts of the target rather than
    swallow it) and the center shift from N(0, q * side). Targets
    within 0.02 of 1.0 return gt_box itself.
    """
    target = float(target_iou)
    if not (0.0 < target <= 1.0):
        raise DomainError(f"degraded_box: target_iou must lie in (0, 1], got {target_iou}")
    if not gt_box.contained_in(bounds):
        raise DomainError(f"degraded_box: gt_box {gt_box.as_tuple()} exceeds bounds {bounds}")
    if abs(1.0 - target) <= 0.02:
        return gt_box
    q = 1.0 - target
    w, h = gt_box.width, gt_box.height
    cx = (gt_box.x_min + gt_box.x_max) / 2.0
    cy = (gt_box.y_min + gt_box.y_max) / 2.0
    rng = rng_for(seed)
    for _ in range(max_proposals):
        sx = rng.uniform(1.0 - 0.9 * q, 1.0 + 0.1 * q)
        sy = rng.uniform(1.0 - 0.9 * q, 1.0 + 0.1 * q)
        dx = rng.normal(0.0, q * w)
        dy = rng.normal(0.0, q * h)
        nw, nh = w * sx, h * sy
        cand = clamp_box(cx + dx - nw / 2.0, cy + dy - nh / 2.0,
                         cx + dx + nw / 2.0, cy + dy + nh / 2.0, bounds)
        if abs(_box_iou(cand, gt_box) - target) <= 0.02:
            return cand
    raise GenerationFailedError(
        f"degraded_box: no box with IoU {target} +/- 0.02 found in {max_proposals} proposals")


def sample_positive_points(gt: BinaryMask, m: int, seed: int) -> list[PointPrompt]:
    """m distinct foreground pixel centers, sampled without replacement."""
    if m < 0:
        raise DomainError(f"sample_positive_points: m must be >= 0, got {m}")
    flat = np.flatnonzero(gt.values)
    if flat.size < m:
        raise InsufficientForegroundError(
            f"sample_positive_points: requested {m} points from {flat.size} foreground pixels")
    if m == 0:
        return []
    rng = rng_for(seed)
    picks = rng.choice(flat.size, size=m, replace=False)
    w = gt.width
    out = []
    for idx in flat[picks]:
        y, x = divmod(int(idx), w)
        out.append(PointPrompt(x + 0.5, y + 0.5, POSITIVE))
    return out


def prompt_set_to_dict(ps: PromptSet) -> dict:
    """The JSON form: {"boxes": [[x0,y0,x1,y1],...], "points": [{...}]}."""
    return {
        "boxes": [list(b.as_tuple()) for b in ps.boxes],
        "points": [{"x": p.x, "y": p.y, "label": p.label} for p in ps.points],
    }


def prompt_set_from_dict(d: dict) -> PromptSet:
    try:
        boxes = tuple(BBox(*(float(c) for c in b)) for b in d["boxes"])
        points = tuple(PointPrompt(float(p["x"]), float(p["y"]), p.get("label", POSITIVE))
                       for p in d.get("points", []))
    except (KeyError, TypeError) as exc:
        raise DomainError(f"prompt set: malformed JSON structure ({exc})") from exc
    return PromptSet(boxes, points)
