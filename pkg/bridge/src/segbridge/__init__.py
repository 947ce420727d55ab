"""HTTP inference server for promptable segmentation models.

Implements wire protocol v1 (POST /v1/segment, GET /v1/health) around
either a TorchScript checkpoint or a weight-free deterministic mock
model, with bounded request concurrency and structured HTTP errors.
"""

from .adapt import (
    Letterbox,
    adapt_model_output,
    letterbox_boxes,
    letterbox_image,
    letterbox_points,
    logistic,
    plan_letterbox,
    unletterbox_mask,
)
from .app import create_app, parse_segment_payload, run_inference
from .cli import build_server, main
from .config import DEFAULT_PORT, MOCK_SOURCE, BridgeConfig
from .errors import (
    BridgeError,
    ConfigError,
    InferenceError,
    ModelLoadError,
    RequestError,
)
from .models import (
    MOCK_INSIDE_P,
    MOCK_OUTSIDE_P,
    InferenceModel,
    MockModel,
    TorchscriptModel,
    load_model,
)
from .pngcodec import decode_gray8, encode_gray16, quantize16

__version__ = "0.1.0"

__all__ = [
    "BridgeConfig",
    "BridgeError",
    "ConfigError",
    "DEFAULT_PORT",
    "InferenceError",
    "InferenceModel",
    "Letterbox",
    "MOCK_INSIDE_P",
    "MOCK_OUTSIDE_P",
    "MOCK_SOURCE",
    "MockModel",
    "ModelLoadError",
    "RequestError",
    "TorchscriptModel",
    "__version__",
    "adapt_model_output",
    "build_server",
    "create_app",
    "decode_gray8",
    "encode_gray16",
    "letterbox_boxes",
    "letterbox_image",
    "letterbox_points",
    "load_model",
    "logistic",
    "main",
    "parse_segment_payload",
    "plan_letterbox",
    "quantize16",
    "run_inference",
    "unletterbox_mask",
]
