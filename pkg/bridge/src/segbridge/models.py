"""Model backends the server can put behind the wire protocol.

Every backend implements the same call shape:

    infer(image01, boxes, points) -> (B, H, W) float array

with image01 a (H, W) float32 array in [0, 1], boxes a (B, 4) float32
array of [x0, y0, x1, y1], and points a (P, 3) float32 array of rows
[x, y, label] where label is 1.0 (positive) or 0.0 (negative); P may be
zero. Two attributes describe the output contract:

* ``emits_probabilities`` — True when outputs are already in [0, 1];
  otherwise they are treated as logits and mapped through the logistic.
* ``input_size`` — a square working resolution the server must
  letterbox to, or None to run at the request resolution.

TorchScript checkpoints are served checkpoint-agnostically: the loaded
module is called as ``forward(image, boxes, points)`` with image shaped
[1, 1, S, S] and must return [B, S, S] or [B, 1, S, S]. A checkpoint
may expose the two attributes above to override the defaults (logits,
request-native resolution).
"""

from __future__ import annotations

from typing import Protocol, runtime_checkable

import numpy as np

from .config import BridgeConfig
from .errors import InferenceError, ModelLoadError

__all__ = ["InferenceModel", "MockModel", "TorchscriptModel", "load_model",
           "MOCK_INSIDE_P", "MOCK_OUTSIDE_P"]

MOCK_INSIDE_P = 0.8
MOCK_OUTSIDE_P = 0.1


@runtime_checkable
class InferenceModel(Protocol):
    emits_probabilities: bool
    input_size: int | None

    def infer(self, image01: np.ndarray, boxes: np.ndarray,
              points: np.ndarray) -> np.ndarray: ...


class MockModel:
    """Weight-free deterministic model for protocol conformance.

    The rule: every pixel whose center (column + 0.5, row + 0.5) lies
    inside the box — closed containment — gets probability 0.8; every
    other pixel gets 0.1. Image content and points are ignored.
    """

    emits_probabilities = True
    input_size = None

    def infer(self, image01: np.ndarray, boxes: np.ndarray,
              points: np.ndarray) -> np.ndarray:
        h, w = image01.shape
        cx = np.arange(w, dtype=np.float64) + 0.5
        cy = np.arange(h, dtype=np.float64) + 0.5
        out = np.empty((boxes.shape[0], h, w), dtype=np.float32)
        for i, (x0, y0, x1, y1) in enumerate(np.asarray(boxes, dtype=np.float64)):
            inside = ((cx >= x0) & (cx <= x1))[None, :] & ((cy >= y0) & (cy <= y1))[:, None]
            out[i] = np.where(inside, MOCK_INSIDE_P, MOCK_OUTSIDE_P)
        return out


class TorchscriptModel:
    """A TorchScript checkpoint behind the common infer() call shape."""

    def __init__(self, path: str):
        try:
            import torch
        except ImportError as exc:
            raise ModelLoadError(
                "serving a checkpoint requires torch (pip install segbridge[torch])"
            ) from exc
        try:
            self._module = torch.jit.load(path, map_location="cpu")
        except Exception as exc:
            raise ModelLoadError(f"cannot load TorchScript checkpoint {path!r}: {exc}") from exc
        self._module.eval()
        self._torch = torch
        self.emits_probabilities = bool(getattr(self._module, "emits_probabilities", False))
        size = getattr(self._module, "input_size", None)
        if size is not None:
            size = int(size)
            if size < 1:
                raise ModelLoadError(f"checkpoint declares input_size {size}; must be >= 1")
        self.input_size = size

    def infer(self, image01: np.ndarray, boxes: np.ndarray,
              points: np.ndarray) -> np.ndarray:
        torch = self._torch
        image_t = torch.from_numpy(
            np.ascontiguousarray(image01, dtype=np.float32))[None, None]
        boxes_t = torch.from_numpy(np.ascontiguousarray(boxes, dtype=np.float32))
        points_t = torch.from_numpy(np.ascontiguousarray(points, dtype=np.float32))
        with torch.no_grad():
            raw = self._module(image_t, boxes_t, points_t)
        arr = np.asarray(raw.detach().cpu().numpy(), dtype=np.float64)
        if arr.ndim == 4 and arr.shape[1] == 1:
            arr = arr[:, 0]
        if arr.ndim != 3:
            raise InferenceError(
                f"checkpoint returned shape {arr.shape}; expected [B, H, W] or [B, 1, H, W]")
        return arr


def load_model(config: BridgeConfig) -> InferenceModel:
    """Build the model the configuration names; mock touches no files."""
    if config.is_mock:
        return MockModel()
    return TorchscriptModel(config.model_source)
