"""Adapting raw model output to wire-format probability masks.

Two concerns live here:

* Fixed-resolution models: the request image is letterbox-resized onto a
  square canvas (aspect preserved, centered, zero padding) and prompt
  coordinates are mapped with it; model output is cropped back out of
  the canvas and resized to the request dimensions before encoding, so
  clients never see model-native resolutions.
* Calibration and encoding: models that emit logits are mapped through
  the logistic function; probabilities are clipped to [0, 1] and encoded
  as the protocol's 16-bit grayscale PNG.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import InferenceError
from .pngcodec import encode_gray16

__all__ = [
    "Letterbox",
    "plan_letterbox",
    "letterbox_image",
    "letterbox_boxes",
    "letterbox_points",
    "unletterbox_mask",
    "logistic",
    "adapt_model_output",
]


@dataclass(frozen=True)
class Letterbox:
    """Recorded forward transform onto a square canvas.

    Coordinates map as x' = x * scale + pad_x (and likewise for y),
    which is its own inverse bookkeeping: the content occupies the
    canvas region [pad_y : pad_y + content_h, pad_x : pad_x + content_w].
    """

    canvas: int
    scale: float
    pad_x: int
    pad_y: int
    content_w: int
    content_h: int


def plan_letterbox(width: int, height: int, canvas: int) -> Letterbox:
    """Fit a width x height image onto a canvas x canvas square."""
    if canvas < 1:
        raise InferenceError(f"letterbox canvas must be >= 1, got {canvas}")
    scale = min(canvas / width, canvas / height)
    content_w = max(1, int(round(width * scale)))
    content_h = max(1, int(round(height * scale)))
    pad_x = (canvas - content_w) // 2
    pad_y = (canvas - content_h) // 2
    return Letterbox(canvas, scale, pad_x, pad_y, content_w, content_h)


def _resize_bilinear(values: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    img = Image.fromarray(np.ascontiguousarray(values, dtype=np.float32), mode="F")
    return np.asarray(img.resize((out_w, out_h), Image.Resampling.BILINEAR),
                      dtype=np.float32)


def letterbox_image(image01: np.ndarray, lb: Letterbox) -> np.ndarray:
    """Place a (H, W) float image in [0, 1] onto the zero-padded canvas."""
    out = np.zeros((lb.canvas, lb.canvas), dtype=np.float32)
    content = _resize_bilinear(np.asarray(image01, dtype=np.float32),
                               lb.content_w, lb.content_h)
    out[lb.pad_y:lb.pad_y + lb.content_h, lb.pad_x:lb.pad_x + lb.content_w] = content
    return out


def letterbox_boxes(boxes: np.ndarray, lb: Letterbox) -> np.ndarray:
    """Map (B, 4) boxes [x0, y0, x1, y1] into canvas coordinates."""
    out = np.asarray(boxes, dtype=np.float32).copy().reshape(-1, 4)
    out[:, 0] = out[:, 0] * lb.scale + lb.pad_x
    out[:, 2] = out[:, 2] * lb.scale + lb.pad_x
    out[:, 1] = out[:, 1] * lb.scale + lb.pad_y
    out[:, 3] = out[:, 3] * lb.scale + lb.pad_y
    return out


def letterbox_points(points: np.ndarray, lb: Letterbox) -> np.ndarray:
    """Map (P, 3) points [x, y, label] into canvas coordinates; labels pass through."""
    out = np.asarray(points, dtype=np.float32).copy().reshape(-1, 3)
    out[:, 0] = out[:, 0] * lb.scale + lb.pad_x
    out[:, 1] = out[:, 1] * lb.scale + lb.pad_y
    return out


def unletterbox_mask(canvas_mask: np.ndarray, lb: Letterbox,
                     out_width: int, out_height: int) -> np.ndarray:
    """Crop the content region out of the canvas and resize to request dims."""
    content = canvas_mask[lb.pad_y:lb.pad_y + lb.content_h,
                          lb.pad_x:lb.pad_x + lb.content_w]
    return _resize_bilinear(content, out_width, out_height)


def logistic(x: np.ndarray) -> np.ndarray:
    """Numerically stable elementwise logistic function."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def adapt_model_output(raw: np.ndarray, out_width: int, out_height: int, *,
                       emits_probabilities: bool = False,
                       letterbox: Letterbox | None = None) -> bytes:
    """Turn one raw per-box model output into wire-format PNG bytes.

    raw is a 2-D float array — logits unless emits_probabilities — at
    canvas resolution when a letterbox transform is given, otherwise at
    the request resolution. Shape mismatches raise InferenceError with
    a diagnostic; the HTTP layer reports those as status 500.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim != 2:
        raise InferenceError(f"model output must be 2-D per box, got shape {raw.shape}")
    if letterbox is not None:
        expected = (letterbox.canvas, letterbox.canvas)
        if raw.shape != expected:
            raise InferenceError(
                f"model output shape {raw.shape} does not match canvas {expected}")
    elif raw.shape != (out_height, out_width):
        raise InferenceError(
            f"model output shape {raw.shape} does not match request "
            f"dimensions ({out_height}, {out_width})")

    probs = raw if emits_probabilities else logistic(raw)
    probs = np.clip(probs, 0.0, 1.0)
    if letterbox is not None:
        probs = np.clip(unletterbox_mask(probs, letterbox, out_width, out_height), 0.0, 1.0)
    return encode_gray16(probs)
