"""Dataset generation, experiment execution, and reporting.

A run takes a dataset of (image, ground-truth mask) pairs, a list of
prompt settings, and a backend; for each entry and setting it fabricates
an initial box at the setting's overlap ratio, runs the refinement
pipeline, and records before/after Dice and IoU. Per-entry randomness is
derived from a stable hash of (global seed, entry id, setting label), so
extending a dataset never reshuffles existing entries.

Prompt setting syntax: "<N>B:<ratio>", optionally "<M>P&" in front for M
initial positive points and ":k<K>" behind to override the refined point
count. Examples: "3B:0.5", "3P&3B:0.75", "3B:0.5:k0".
"""

from __future__ import annotations

import csv
import io
import json
import re
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DecodeError,
    DomainError,
    EvalRunError,
    GenerationFailedError,
    UncersegError,
)
from .metrics import dice, iou
from .pngio import read_binary_png, read_image_png, write_binary_png, write_image_png
from .prompts import degraded_box, sample_positive_points, tight_bbox
from .raster import BinaryMask, ImageRaster, threshold_mask
from .refine import RefineConfig, medsam_u
from .seeds import derive, derive_named, rng_for
from .segmenter import Segmenter

__all__ = [
    "ManifestEntry",
    "DatasetManifest",
    "DatasetEntry",
    "Dataset",
    "PromptSetting",
    "parse_setting",
    "parse_settings",
    "EvalRecord",
    "SettingAggregate",
    "SweepReport",
    "CSV_HEADER",
    "gen_synthetic",
    "load_dataset",
    "run_eval",
    "report",
    "write_csv",
    "write_json",
]

CSV_HEADER = ("id", "setting", "dice_before", "iou_before", "dice_after",
              "iou_after", "accepted", "u_before", "u_after", "wall_ms")

_SETTING_RE = re.compile(r"^(?:(\d+)P&)?(\d+)B:(\d*\.?\d+)(?::k(\d+))?$")


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    image_path: str
    mask_path: str


@dataclass(frozen=True)
class DatasetManifest:
    modality: str
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise DomainError(f"manifest: duplicate entry ids {dupes}")


@dataclass(frozen=True, eq=False)
class DatasetEntry:
    """One decoded (image, mask) pair."""

    id: str
    image: ImageRaster
    mask: BinaryMask
    image_path: str
    mask_path: str


@dataclass(frozen=True, eq=False)
class Dataset:
    modality: str
    entries: tuple[DatasetEntry, ...]


@dataclass(frozen=True)
class PromptSetting:
    """One experiment column: box count, overlap ratio, initial points."""

    n_boxes: int
    ratio: float
    m_points: int = 0
    k_override: int | None = None

    def __post_init__(self):
        if self.n_boxes < 1:
            raise DomainError(f"setting: box count must be >= 1, got {self.n_boxes}")
        if not (0.0 < self.ratio <= 1.0):
            raise DomainError(f"setting: ratio must lie in (0, 1], got {self.ratio}")
        if self.m_points < 0:
            raise DomainError(f"setting: point count must be >= 0, got {self.m_points}")
        if self.k_override is not None and self.k_override < 0:
            raise DomainError(f"setting: k override must be >= 0, got {self.k_override}")

    @property
    def label(self) -> str:
        core = f"{self.n_boxes}B({self.ratio:g})"
        if self.m_points:
            core = f"{self.m_points}P&" + core
        if self.k_override is not None:
            core += f":k{self.k_override}"
        return core


def parse_setting(text: str) -> PromptSetting:
    m = _SETTING_RE.match(text.strip())
    if not m:
        raise DomainError(
            f"setting {text!r}: expected [<M>P&]<N>B:<ratio>[:k<K>], e.g. 3B:0.5 or 3P&3B:0.75")
    m_points, n_boxes, ratio, k = m.groups()
    return PromptSetting(n_boxes=int(n_boxes), ratio=float(ratio),
                         m_points=int(m_points) if m_points else 0,
                         k_override=int(k) if k is not None else None)


def parse_settings(text: str) -> list[PromptSetting]:
    """Parse a comma-separated settings list."""
    parts = [p for p in (s.strip() for s in text.split(",")) if p]
    if not parts:
        raise DomainError("settings: the list is empty")
    return [parse_setting(p) for p in parts]


@dataclass(frozen=True)
class EvalRecord:
    """Before/after metrics for one (entry, setting) cell."""

    id: str
    setting: str
    dice_before: float
    iou_before: float
    dice_after: float
    iou_after: float
    accepted: bool
    u_before: float
    u_after: float
    wall_ms: float
    error: str = ""

    def __post_init__(self):
        if self.error:
            return
        for name in ("dice_before", "iou_before", "dice_after", "iou_after",
                     "u_before", "u_after"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"EvalRecord {self.id}: {name}={v} outside [0, 1]")
        if self.accepted and not self.u_after < self.u_before:
            raise DomainError(
                f"EvalRecord {self.id}: accepted but uncertainty did not decrease "
                f"({self.u_before} -> {self.u_after})")


@dataclass(frozen=True)
class SettingAggregate:
    setting: str
    count: int
    failures: int
    acceptance_rate: float
    dice_before_mean: float
    dice_before_std: float
    dice_after_mean: float
    dice_after_std: float
    iou_before_mean: float
    iou_before_std: float
    iou_after_mean: float
    iou_after_std: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class SweepReport:
    rows: tuple[SettingAggregate, ...]


def _ellipse_mask(rng: np.random.Generator, width: int, height: int) -> np.ndarray:
    """A union of 1..3 axis-aligned ellipses, each covering 2..20% of the
    frame, redrawn until the union covers 2..45% of it.

    A single-ellipse draw always lands in that band, so the rejection
    loop terminates quickly.
    """
    area = width * height
    ys, xs = np.mgrid[0:height, 0:width]
    for _ in range(10000):
        n = int(rng.integers(1, 4))
        mask = np.zeros((height, width), dtype=np.uint8)
        for _ in range(n):
            frac = rng.uniform(0.02, 0.20)
            aspect = rng.uniform(0.5, 2.0)
            rx = min(np.sqrt(frac * area * aspect / np.pi), width / 2 - 1)
            ry = min(np.sqrt(frac * area / (aspect * np.pi)), height / 2 - 1)
            cx = rng.uniform(rx, width - rx)
            cy = rng.uniform(ry, height - ry)
            ell = (((xs + 0.5 - cx) / rx) ** 2 + ((ys + 0.5 - cy) / ry) ** 2 <= 1.0)
            mask |= ell.astype(np.uint8)
        if 0.02 <= mask.sum() / area <= 0.45:
            return mask
    raise GenerationFailedError(
        f"gen_synthetic: no mask in the coverage band for dims {width}x{height}")


def _render_image(rng: np.random.Generator, mask: np.ndarray) -> np.ndarray:
    """Grayscale rendering: dim gradient background, brighter target."""
    height, width = mask.shape
    grad = np.linspace(60.0, 120.0, height)[:, None] * np.ones((1, width))
    noise = rng.normal(0.0, 8.0, size=mask.shape)
    img = grad + noise + mask * 60.0
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def gen_synthetic(out_dir, count: int, seed: int,
                  dims: tuple[int, int] = (128, 128)) -> Path:
    """Write a synthetic corpus and its manifest; returns the manifest path.

    Deterministic given (count, seed, dims): rerunning produces
    bit-identical files.
    """
    if count < 1:
        raise DomainError(f"gen_synthetic: count must be >= 1, got {count}")
    width, height = int(dims[0]), int(dims[1])
    if width < 8 or height < 8:
        raise DomainError(f"gen_synthetic: dims must be at least 8x8, got {dims}")
    root = Path(out_dir)
    (root / "images").mkdir(parents=True, exist_ok=True)
    (root / "masks").mkdir(parents=True, exist_ok=True)
    entries = []
    for i in range(count):
        rng = rng_for(seed, i)
        mask = _ellipse_mask(rng, width, height)
        image = _render_image(rng, mask)
        name = f"syn{i:04d}.png"
        write_image_png(ImageRaster(image), root / "images" / name)
        write_binary_png(BinaryMask(mask), root / "masks" / name)
        entries.append({"id": f"syn{i:04d}",
                        "image_path": f"images/{name}",
                        "mask_path": f"masks/{name}"})
    manifest_path = root / "manifest.json"
    manifest = {"modality": "synthetic", "entries": entries}
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest_path


def load_dataset(manifest_path) -> Dataset:
    """Load and validate a manifest plus every referenced file.

    Paths are resolved relative to the manifest's directory. Masks must
    be 8-bit grayscale PNGs and are binarized (nonzero -> 1); each
    mask's dimensions must match its image.
    """
    path = Path(manifest_path)
    if not path.is_file():
        raise DecodeError(f"manifest: no such file: {path}")
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DecodeError(f"manifest {path}: not valid JSON ({exc})") from exc
    if not isinstance(raw, dict) or not isinstance(raw.get("entries"), list):
        raise DecodeError(f"manifest {path}: expected an object with an 'entries' list")
    manifest = DatasetManifest(
        modality=str(raw.get("modality", "")),
        entries=tuple(ManifestEntry(id=str(e.get("id", "")),
                                    image_path=str(e.get("image_path", "")),
                                    mask_path=str(e.get("mask_path", "")))
                      for e in raw["entries"]),
    )
    base = path.parent
    loaded = []
    for entry in manifest.entries:
        try:
            image = read_image_png(base / entry.image_path)
            mask = read_binary_png(base / entry.mask_path)
        except DecodeError as exc:
            raise DecodeError(f"entry {entry.id!r}: {exc}") from exc
        if (image.width, image.height) != (mask.width, mask.height):
            raise DecodeError(
                f"entry {entry.id!r}: image is {image.width}x{image.height} but "
                f"mask is {mask.width}x{mask.height}")
        loaded.append(DatasetEntry(id=entry.id, image=image, mask=mask,
                                   image_path=str(base / entry.image_path),
                                   mask_path=str(base / entry.mask_path)))
    return Dataset(modality=manifest.modality, entries=tuple(loaded))


BackendFactory = Callable[[DatasetEntry], Segmenter]

# sub-streams of the per-entry seed
_SEED_BOX = 0
_SEED_POINTS = 1
_SEED_PIPELINE = 2


def _eval_one(entry: DatasetEntry, setting: PromptSetting, cfg: RefineConfig,
              backend: Segmenter, timing: bool) -> EvalRecord:
    eseed = derive_named(cfg.seed, entry.id, setting.label)
    bounds = (entry.image.width, entry.image.height)
    gt_box = tight_bbox(entry.mask)
    b_init = degraded_box(gt_box, setting.ratio, derive(eseed, _SEED_BOX), bounds)
    points = ()
    if setting.m_points:
        points = tuple(sample_positive_points(entry.mask, setting.m_points,
                                              derive(eseed, _SEED_POINTS)))
    run_cfg = replace(
        cfg,
        n_boxes=setting.n_boxes,
        k_points=setting.k_override if setting.k_override is not None else cfg.k_points,
        seed=derive(eseed, _SEED_PIPELINE),
    )
    start = time.perf_counter()
    final_mask, _final_u, trace = medsam_u(entry.image, b_init, run_cfg,
                                           backend, points=points)
    wall_ms = (time.perf_counter() - start) * 1000.0 if timing else 0.0
    t = run_cfg.binarize_threshold
    pred_before = threshold_mask(trace.initial_mask, t)
    pred_after = threshold_mask(final_mask, t)
    return EvalRecord(
        id=entry.id,
        setting=setting.label,
        dice_before=dice(pred_before, entry.mask),
        iou_before=iou(pred_before, entry.mask),
        dice_after=dice(pred_after, entry.mask),
        iou_after=iou(pred_after, entry.mask),
        accepted=trace.accepted_any,
        u_before=trace.initial_scalar_u,
        u_after=trace.final_scalar_u,
        wall_ms=wall_ms,
    )


def run_eval(dataset: Dataset, settings: Sequence[PromptSetting],
             cfg: RefineConfig, backend: Segmenter | BackendFactory,
             timing: bool = False) -> list[EvalRecord]:
    """Evaluate every (entry, setting) cell; returns records grouped by
    setting in request order, sorted by entry id within each group.

    backend is either one Segmenter used for all entries, or a callable
    mapping a DatasetEntry to its Segmenter (the oracle backend needs
    the entry's own ground truth). Per-entry failures become records
    with the error field set; more than 10% failures abort the run.
    """
    if not dataset.entries:
        raise DomainError("run_eval: the dataset is empty")
    if not settings:
        raise DomainError("run_eval: no settings given")
    if isinstance(backend, Segmenter):
        factory: BackendFactory = lambda entry: backend
    elif callable(backend):
        factory = backend
    else:
        raise DomainError("run_eval: backend must be a Segmenter or a factory callable")

    records = []
    failures = 0
    for setting in settings:
        for entry in dataset.entries:
            try:
                records.append(_eval_one(entry, setting, cfg, factory(entry), timing))
            except UncersegError as exc:
                failures += 1
                records.append(EvalRecord(
                    id=entry.id, setting=setting.label,
                    dice_before=0.0, iou_before=0.0, dice_after=0.0,
                    iou_after=0.0, accepted=False, u_before=0.0, u_after=0.0,
                    wall_ms=0.0, error=f"{type(exc).__name__}: {exc}"))
    total = len(records)
    if failures * 10 > total:
        raise EvalRunError(f"run_eval: {failures} of {total} cells failed")
    order = {s.label: i for i, s in enumerate(settings)}
    records.sort(key=lambda r: (order[r.setting], r.id))
    return records


def report(records: Sequence[EvalRecord]) -> SweepReport:
    """Aggregate records per setting; error rows count as failures only."""
    records = list(records)
    if not records:
        raise DomainError("report: no records")
    rows = []
    # row order follows first appearance, so sweeps keep their request order
    labels = list(dict.fromkeys(r.setting for r in records))
    for setting in labels:
        group = [r for r in records if r.setting == setting]
        ok = [r for r in group if not r.error]
        failures = len(group) - len(ok)

        def _stats(attr):
            vals = np.array([getattr(r, attr) for r in ok], dtype=np.float64)
            if vals.size == 0:
                return 0.0, 0.0
            return float(vals.mean()), float(vals.std())

        db_m, db_s = _stats("dice_before")
        da_m, da_s = _stats("dice_after")
        ib_m, ib_s = _stats("iou_before")
        ia_m, ia_s = _stats("iou_after")
        acc = sum(1 for r in ok if r.accepted) / len(ok) if ok else 0.0
        rows.append(SettingAggregate(
            setting=setting, count=len(group), failures=failures,
            acceptance_rate=acc,
            dice_before_mean=db_m, dice_before_std=db_s,
            dice_after_mean=da_m, dice_after_std=da_s,
            iou_before_mean=ib_m, iou_before_std=ib_s,
            iou_after_mean=ia_m, iou_after_std=ia_s))
    return SweepReport(rows=tuple(rows))


def _fmt(v: float) -> str:
    return format(v, ".12g")


def write_csv(records: Sequence[EvalRecord], out) -> None:
    """Write records under the fixed header; failed rows leave the metric
    columns empty and mark the accepted column 'error'."""

    def _emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in records:
            if r.error:
                w.writerow([r.id, r.setting, "", "", "", "", "error", "", "",
                            _fmt(r.wall_ms)])
            else:
                w.writerow([r.id, r.setting, _fmt(r.dice_before), _fmt(r.iou_before),
                            _fmt(r.dice_after), _fmt(r.iou_after),
                            "true" if r.accepted else "false",
                            _fmt(r.u_before), _fmt(r.u_after), _fmt(r.wall_ms)])

    if hasattr(out, "write"):
        _emit(out)
    else:
        with open(out, "w", newline="") as fh:
            _emit(fh)


def csv_bytes(records: Sequence[EvalRecord]) -> bytes:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue().encode("utf-8")


def write_json(records: Sequence[EvalRecord], sweep: SweepReport, out) -> None:
    """JSON mirror of the CSV rows plus the per-setting aggregates."""
    doc = {
        "records": [{
            "id": r.id, "setting": r.setting,
            "dice_before": r.dice_before, "iou_before": r.iou_before,
            "dice_after": r.dice_after, "iou_after": r.iou_after,
            "accepted": r.accepted, "u_before": r.u_before,
            "u_after": r.u_after, "wall_ms": r.wall_ms, "error": r.error,
        } for r in records],
        "settings": [row.to_dict() for row in sweep.rows],
    }
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if hasattr(out, "write"):
        out.write(text)
    else:
        Path(out).write_text(text)
