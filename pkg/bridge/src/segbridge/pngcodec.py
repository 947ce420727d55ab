"""PNG codec for the wire protocol, implemented independently of any client.

Requests carry the image as an 8-bit PNG (color inputs are converted to
grayscale). Responses carry one 16-bit grayscale PNG per box with
v = floor(p * 65535 + 0.5) — round half up — so any probability
survives the round trip within 1/65535.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from .errors import RequestError

__all__ = ["decode_gray8", "encode_gray16", "quantize16"]

_16BIT_MODES = ("I;16", "I;16B", "I;16L", "I")


def decode_gray8(data: bytes) -> np.ndarray:
    """Decode an 8-bit PNG to a (H, W) uint8 array; color converts to grayscale."""
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except Exception as exc:
        raise RequestError(f"image: not a decodable PNG ({exc})") from exc
    if img.mode in _16BIT_MODES:
        raise RequestError("image: expected an 8-bit PNG, got 16-bit samples")
    if img.mode != "L":
        img = img.convert("L")
    return np.asarray(img, dtype=np.uint8)


def quantize16(probs: np.ndarray) -> np.ndarray:
    """Map probabilities in [0, 1] to uint16 codes, rounding half up."""
    clipped = np.clip(np.asarray(probs, dtype=np.float64), 0.0, 1.0)
    return np.floor(clipped * 65535.0 + 0.5).astype(np.uint16)


def encode_gray16(probs: np.ndarray) -> bytes:
    """Encode a (H, W) probability array as a 16-bit grayscale PNG."""
    buf = io.BytesIO()
    Image.fromarray(quantize16(probs)).save(buf, format="PNG")
    return buf.getvalue()
