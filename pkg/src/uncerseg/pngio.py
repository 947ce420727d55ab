"""PNG encodings for masks, maps, and images.

These encodings are bit-exact and shared with the HTTP wire protocol:

* BinaryMask: 8-bit grayscale, 0 -> 0 and 1 -> 255; readers binarize
  any nonzero byte back to 1.
* ProbMask / UncertaintyMap: 16-bit grayscale with v = floor(p * 65535
  + 0.5) on write (round half up) and p = v / 65535 on read, so a
  round trip is exact and any probability survives within 1/65535.
* ImageRaster: plain 8-bit grayscale; color inputs are converted.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DecodeError
from .raster import BinaryMask, ImageRaster, ProbMask, UncertaintyMap

__all__ = [
    "encode_binary_png", "decode_binary_png", "write_binary_png", "read_binary_png",
    "encode_prob_png", "decode_prob_png", "write_prob_png", "read_prob_png",
    "decode_uncertainty_png", "read_uncertainty_png", "write_uncertainty_png",
    "encode_image_png", "decode_image_png", "write_image_png", "read_image_png",
    "quantize_probs", "dequantize_probs",
]

_16BIT_MODES = ("I;16", "I;16B", "I;16L", "I")


def quantize_probs(values: np.ndarray) -> np.ndarray:
    """Map probabilities to uint16 codes, rounding half up."""
    return np.floor(np.asarray(values, dtype=np.float64) * 65535.0 + 0.5).astype(np.uint16)


def dequantize_probs(codes: np.ndarray) -> np.ndarray:
    """Map uint16 codes back to probabilities in [0, 1]."""
    return np.asarray(codes, dtype=np.float64) / 65535.0


def _load(data: bytes, what: str) -> Image.Image:
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
        return img
    except Exception as exc:
        raise DecodeError(f"{what}: not a decodable image ({exc})") from exc


def encode_binary_png(mask: BinaryMask) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(mask.values * np.uint8(255)).save(buf, format="PNG")
    return buf.getvalue()


def decode_binary_png(data: bytes) -> BinaryMask:
    img = _load(data, "binary mask")
    if img.mode in _16BIT_MODES:
        raise DecodeError("binary mask: expected an 8-bit grayscale PNG, got 16-bit")
    if img.mode != "L":
        raise DecodeError(f"binary mask: expected an 8-bit grayscale PNG, got mode {img.mode}")
    arr = np.asarray(img, dtype=np.uint8)
    return BinaryMask((arr != 0).astype(np.uint8))


def _encode_16bit(values: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(quantize_probs(values)).save(buf, format="PNG")
    return buf.getvalue()


def _decode_16bit(data: bytes, what: str) -> np.ndarray:
    img = _load(data, what)
    if img.mode not in _16BIT_MODES:
        raise DecodeError(f"{what}: expected a 16-bit grayscale PNG, got mode {img.mode}")
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise DecodeError(f"{what}: expected a single-channel image")
    if arr.min(initial=0) < 0 or arr.max(initial=0) > 65535:
        raise DecodeError(f"{what}: sample values exceed 16-bit range")
    return dequantize_probs(arr)


def encode_prob_png(mask: ProbMask) -> bytes:
    return _encode_16bit(mask.values)


def decode_prob_png(data: bytes) -> ProbMask:
    return ProbMask(_decode_16bit(data, "probability mask"))


def write_uncertainty_png(umap: UncertaintyMap, path) -> None:
    Path(path).write_bytes(_encode_16bit(umap.values))


def decode_uncertainty_png(data: bytes) -> UncertaintyMap:
    return UncertaintyMap(_decode_16bit(data, "uncertainty map"))


def read_uncertainty_png(path) -> UncertaintyMap:
    return decode_uncertainty_png(_read(path))


def encode_image_png(image: ImageRaster) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(image.values).save(buf, format="PNG")
    return buf.getvalue()


def decode_image_png(data: bytes) -> ImageRaster:
    img = _load(data, "image")
    if img.mode in _16BIT_MODES:
        raise DecodeError("image: expected an 8-bit PNG, got 16-bit samples")
    if img.mode != "L":
        img = img.convert("L")
    return ImageRaster(np.asarray(img, dtype=np.uint8))


def _read(path) -> bytes:
    p = Path(path)
    if not p.is_file():
        raise DecodeError(f"no such file: {p}")
    return p.read_bytes()


def write_binary_png(mask: BinaryMask, path) -> None:
    Path(path).write_bytes(encode_binary_png(mask))


def read_binary_png(path) -> BinaryMask:
    return decode_binary_png(_read(path))


def write_prob_png(mask: ProbMask, path) -> None:
    Path(path).write_bytes(encode_prob_png(mask))


def read_prob_png(path) -> ProbMask:
    return decode_prob_png(_read(path))


def write_image_png(image: ImageRaster, path) -> None:
    Path(path).write_bytes(encode_image_png(image))


def read_image_png(path) -> ImageRaster:
    return decode_image_png(_read(path))
