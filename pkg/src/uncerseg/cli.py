"""Command-line surface.

Subcommands: gen (synthetic corpus), refine (one image through the
pipeline), eval (dataset sweep with CSV/JSON reports). Exit codes: 0
success, 2 usage or input validation, 3 backend or run failure, 4 file
I/O or decode failure. Human-readable logging goes to stderr; reports
and machine-readable values go to files and stdout only.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .errors import (
    DecodeError,
    DomainError,
    SegmenterError,
    UncersegError,
)
from .harness import (
    gen_synthetic,
    load_dataset,
    parse_settings,
    report,
    run_eval,
    write_csv,
    write_json,
)
from .metrics import dice, iou
from .pngio import (
    read_binary_png,
    read_image_png,
    write_prob_png,
    write_uncertainty_png,
)
from .prompts import BBox
from .raster import threshold_mask
from .refine import RefineConfig, medsam_u
from .remote import ENDPOINT_ENV, RemoteSegmenter
from .segmenter import OracleSegmenter

__all__ = ["main"]


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _parse_box(text: str) -> BBox:
    parts = text.split(",")
    if len(parts) != 4:
        raise DomainError(f"--box: expected x_min,y_min,x_max,y_max, got {text!r}")
    try:
        coords = [float(p) for p in parts]
    except ValueError:
        raise DomainError(f"--box: coordinates must be numbers, got {text!r}") from None
    try:
        return BBox(*coords)
    except DomainError as exc:
        raise DomainError(f"--box: {exc}") from exc


def _parse_dims(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    try:
        w, h = (int(p) for p in parts)
        return w, h
    except ValueError:
        raise DomainError(f"--dims: expected WIDTHxHEIGHT, got {text!r}") from None


def _add_cfg_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=3, help="box prompts per inference pass")
    p.add_argument("--sigma-frac", type=float, default=0.05,
                   help="box jitter sigma as a fraction of box side length")
    p.add_argument("--points-k", type=int, default=10,
                   help="refined positive points per round")
    p.add_argument("--tau", type=float, default=0.5,
                   help="uncertainty-region cut as a fraction of the map maximum")
    p.add_argument("--rounds", type=int, default=1, help="maximum refinement rounds")
    p.add_argument("--seed", type=int, default=0, help="global seed")


def _add_backend_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", choices=("oracle", "remote"), default="oracle")
    p.add_argument("--endpoint", default=None,
                   help=f"remote backend URL (default: ${ENDPOINT_ENV})")


def _cfg_from(args: argparse.Namespace) -> RefineConfig:
    return RefineConfig(n_boxes=args.n, sigma_frac=args.sigma_frac,
                        k_points=args.points_k, tau=args.tau,
                        rounds=args.rounds, seed=args.seed)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uncerseg",
        description="Uncertainty-guided prompt refinement for promptable segmenters")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a synthetic dataset")
    p_gen.add_argument("--out-dir", required=True)
    p_gen.add_argument("--count", type=int, default=100)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--dims", default="128x128", help="WIDTHxHEIGHT")
    p_gen.set_defaults(func=_cmd_gen)

    p_ref = sub.add_parser("refine", help="refine one image")
    p_ref.add_argument("--image", required=True)
    p_ref.add_argument("--box", required=True, help="initial box x0,y0,x1,y1")
    p_ref.add_argument("--gt", default=None,
                       help="ground-truth mask PNG (required for the oracle backend)")
    p_ref.add_argument("--out-dir", required=True)
    _add_backend_flags(p_ref)
    _add_cfg_flags(p_ref)
    p_ref.set_defaults(func=_cmd_refine)

    p_eval = sub.add_parser("eval", help="run a dataset sweep")
    p_eval.add_argument("--manifest", required=True)
    p_eval.add_argument("--settings", default="3B:0.5",
                        help="comma list, e.g. 3B:0.5,3P&3B:0.75,3B:0.5:k0")
    p_eval.add_argument("--out", required=True, help="report path prefix")
    p_eval.add_argument("--timing", action="store_true",
                        help="record real wall_ms per cell (CSV is then not "
                             "byte-stable across runs)")
    _add_backend_flags(p_eval)
    _add_cfg_flags(p_eval)
    p_eval.set_defaults(func=_cmd_eval)
    return parser


def _cmd_gen(args: argparse.Namespace) -> int:
    dims = _parse_dims(args.dims)
    manifest = gen_synthetic(args.out_dir, args.count, args.seed, dims)
    _log(f"gen: wrote {args.count} image/mask pairs under {args.out_dir}")
    print(manifest)
    return 0


def _make_backend(args: argparse.Namespace, gt=None):
    if args.backend == "oracle":
        if gt is None:
            raise DomainError("--gt is required with the oracle backend")
        return OracleSegmenter(gt)
    endpoint = args.endpoint
    return RemoteSegmenter(endpoint=endpoint)


def _cmd_refine(args: argparse.Namespace) -> int:
    cfg = _cfg_from(args)
    box = _parse_box(args.box)
    image = read_image_png(args.image)
    gt = read_binary_png(args.gt) if args.gt else None
    backend = _make_backend(args, gt)
    try:
        final_mask, final_u, trace = medsam_u(image, box, cfg, backend)
    finally:
        if hasattr(backend, "close"):
            backend.close()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {
        "mask": "mask.png",
        "uncertainty_initial": "uncertainty_initial.png",
        "uncertainty_final": "uncertainty_final.png",
    }
    write_prob_png(final_mask, out_dir / files["mask"])
    write_uncertainty_png(trace.initial_uncertainty, out_dir / files["uncertainty_initial"])
    write_uncertainty_png(final_u, out_dir / files["uncertainty_final"])
    (out_dir / "trace.json").write_text(
        json.dumps(trace.to_dict(files), indent=2, sort_keys=True) + "\n")
    _log(f"refine: uncertainty {trace.initial_scalar_u:.6f} -> "
         f"{trace.final_scalar_u:.6f} ({trace.final_source}); "
         f"artifacts in {out_dir}")
    if gt is not None:
        pred = threshold_mask(final_mask, cfg.binarize_threshold)
        print(f"dice={dice(pred, gt):.6f} iou={iou(pred, gt):.6f}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    settings = parse_settings(args.settings)
    dataset = load_dataset(args.manifest)
    if not dataset.entries:
        raise DomainError(f"--manifest: {args.manifest} has no entries")
    cfg = _cfg_from(args)
    if args.backend == "oracle":
        backend = lambda entry: OracleSegmenter(entry.mask)
        closer = None
    else:
        backend = RemoteSegmenter(endpoint=args.endpoint)
        closer = backend
    start = time.perf_counter()
    try:
        records = run_eval(dataset, settings, cfg, backend, timing=args.timing)
    finally:
        if closer is not None:
            closer.close()
    elapsed = time.perf_counter() - start
    sweep = report(records)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    csv_path = out.with_name(out.name + ".csv")
    json_path = out.with_name(out.name + ".json")
    write_csv(records, csv_path)
    write_json(records, sweep, json_path)
    _log(f"eval: {len(records)} cells in {elapsed:.2f}s; reports at "
         f"{csv_path} and {json_path}")

    header = (f"{'setting':<16} {'n':>4} {'fail':>4} {'accept':>6} "
              f"{'dice_b':>7} {'dice_a':>7} {'d_dice':>7} {'iou_b':>7} {'iou_a':>7}")
    print(header)
    for row in sweep.rows:
        print(f"{row.setting:<16} {row.count:>4} {row.failures:>4} "
              f"{row.acceptance_rate:>6.2f} "
              f"{row.dice_before_mean:>7.4f} {row.dice_after_mean:>7.4f} "
              f"{row.dice_after_mean - row.dice_before_mean:>+7.4f} "
              f"{row.iou_before_mean:>7.4f} {row.iou_after_mean:>7.4f}")
    if len(sweep.rows) > 1:
        after = [row.dice_after_mean for row in sweep.rows]
        trend = "non-decreasing" if all(b >= a for a, b in zip(after, after[1:])) \
            else "mixed"
        print(f"dice_after trend across rows: {trend}")
    return 0


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DomainError as exc:
        _log(f"error: {exc}")
        return 2
    except (DecodeError, OSError) as exc:
        _log(f"error: {exc}")
        return 4
    except SegmenterError as exc:
        _log(f"error: {exc}")
        return 3
    except UncersegError as exc:
        _log(f"error: {exc}")
        return 3


if __name__ == "__main__":
    sys.exit(main())
