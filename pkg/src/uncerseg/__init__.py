"""Uncertainty-guided prompt refinement for promptable segmenters.

The core loop runs a backend over several jittered copies of a box
prompt, averages the per-prompt masks, reads disagreement off a pixel
entropy map, and re-prompts inside the most uncertain region. A refined
result is kept only when it lowers the scalar uncertainty.
"""

from .aggregate import AggregateResult, aggregate, ugmp
from .errors import (
    BackendError,
    DecodeError,
    DomainError,
    EmptyForegroundError,
    EmptyUncertaintyError,
    EvalRunError,
    GenerationFailedError,
    InsufficientForegroundError,
    ProtocolError,
    SegmenterError,
    TransportError,
    UncersegError,
)
from .harness import (
    Dataset,
    EvalRecord,
    PromptSetting,
    SweepReport,
    gen_synthetic,
    load_dataset,
    parse_setting,
    parse_settings,
    report,
    run_eval,
    write_csv,
    write_json,
)
from .metrics import LossParams, box_iou, dice, focal_dice_loss, iou
from .pngio import (
    read_binary_png,
    read_image_png,
    read_prob_png,
    read_uncertainty_png,
    write_binary_png,
    write_image_png,
    write_prob_png,
    write_uncertainty_png,
)
from .prompts import (
    BBox,
    JitterSpec,
    PointPrompt,
    PromptSet,
    clamp_box,
    degraded_box,
    gen_box_set,
    perturb_box,
    sample_positive_points,
    tight_bbox,
)
from .raster import (
    BinaryMask,
    ImageRaster,
    ProbMask,
    UncertaintyMap,
    binary_entropy,
    entropy_map,
    scalar_uncertainty,
    threshold_mask,
)
from .refine import (
    RefineConfig,
    RefineTrace,
    RoundRecord,
    edge_bbox,
    medsam_u,
    refine_prompts,
    top_k_points,
    uncertainty_region,
)
from .remote import RemoteSegmenter, health, remote_segment
from .segmenter import OracleParams, OracleSegmenter, Segmenter, oracle_segment

__version__ = "0.1.0"

__all__ = [
    "AggregateResult",
    "BBox",
    "BackendError",
    "BinaryMask",
    "Dataset",
    "DecodeError",
    "DomainError",
    "EmptyForegroundError",
    "EmptyUncertaintyError",
    "EvalRecord",
    "EvalRunError",
    "GenerationFailedError",
    "ImageRaster",
    "InsufficientForegroundError",
    "JitterSpec",
    "LossParams",
    "OracleParams",
    "OracleSegmenter",
    "PointPrompt",
    "ProbMask",
    "PromptSet",
    "PromptSetting",
    "ProtocolError",
    "RefineConfig",
    "RefineTrace",
    "RemoteSegmenter",
    "RoundRecord",
    "Segmenter",
    "SegmenterError",
    "SweepReport",
    "TransportError",
    "UncersegError",
    "UncertaintyMap",
    "aggregate",
    "binary_entropy",
    "box_iou",
    "clamp_box",
    "degraded_box",
    "dice",
    "edge_bbox",
    "entropy_map",
    "focal_dice_loss",
    "gen_box_set",
    "gen_synthetic",
    "health",
    "iou",
    "load_dataset",
    "medsam_u",
    "oracle_segment",
    "parse_setting",
    "parse_settings",
    "perturb_box",
    "read_binary_png",
    "read_image_png",
    "read_prob_png",
    "read_uncertainty_png",
    "refine_prompts",
    "remote_segment",
    "report",
    "run_eval",
    "sample_positive_points",
    "scalar_uncertainty",
    "tight_bbox",
    "threshold_mask",
    "top_k_points",
    "ugmp",
    "uncertainty_region",
    "write_binary_png",
    "write_csv",
    "write_image_png",
    "write_json",
    "write_prob_png",
    "write_uncertainty_png",
]
