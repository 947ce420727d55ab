"""The HTTP service: wire protocol v1 over any InferenceModel.

Endpoints:

* ``POST /v1/segment`` — body ``{"image": "<base64 8-bit PNG>",
  "boxes": [[x0, y0, x1, y1], ...],
  "points": [{"x": f, "y": f, "label": "positive"|"negative"}, ...]}``;
  answers ``{"masks": ["<base64 16-bit grayscale PNG>", ...]}`` with one
  mask per box, in request order.
* ``GET /v1/health`` — ``{"status": "ok"}``.

Every failure is a structured JSON body ``{"error": "<message>"}``:
HTTP 400 for malformed requests, 413 for oversize bodies, 500 for
model-side failures. A valid request never receives a 200 with a
malformed body.

Concurrency: at most ``max_concurrent`` segmentation requests run at
once (an asyncio semaphore; the rest queue), and inference runs on a
worker thread so the event loop — and therefore the health endpoint —
stays responsive throughout.
"""

from __future__ import annotations

import base64
import binascii
import json
import math

import numpy as np
from fastapi import FastAPI, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse

from .adapt import adapt_model_output, letterbox_boxes, letterbox_image, \
    letterbox_points, plan_letterbox
from .config import BridgeConfig
from .errors import RequestError
from .models import InferenceModel
from .pngcodec import decode_gray8

__all__ = ["create_app", "parse_segment_payload", "run_inference"]

POSITIVE = "positive"
NEGATIVE = "negative"


def _number(value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise RequestError(f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise RequestError(f"expected a finite number, got {value!r}")
    return value


def _parse_image(payload: dict) -> np.ndarray:
    encoded = payload.get("image")
    if not isinstance(encoded, str):
        raise RequestError("request must carry 'image' as a base64 string")
    try:
        data = base64.b64decode(encoded, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise RequestError(f"image: not valid base64 ({exc})") from exc
    return decode_gray8(data)


def _parse_boxes(payload: dict, width: int, height: int) -> np.ndarray:
    boxes = payload.get("boxes")
    if not isinstance(boxes, list) or not boxes:
        raise RequestError("request must carry a non-empty 'boxes' list")
    parsed = np.empty((len(boxes), 4), dtype=np.float32)
    for i, entry in enumerate(boxes):
        if not isinstance(entry, (list, tuple)) or len(entry) != 4:
            raise RequestError(f"boxes[{i}]: expected [x0, y0, x1, y1]")
        try:
            x0, y0, x1, y1 = (_number(v) for v in entry)
        except RequestError as exc:
            raise RequestError(f"boxes[{i}]: {exc}") from exc
        if not (x0 < x1 and y0 < y1):
            raise RequestError(
                f"boxes[{i}]: requires x0 < x1 and y0 < y1, got {entry}")
        if x0 < 0 or y0 < 0 or x1 > width or y1 > height:
            raise RequestError(
                f"boxes[{i}]: {entry} exceeds the {width}x{height} image bounds")
        parsed[i] = (x0, y0, x1, y1)
    return parsed


def _parse_points(payload: dict, width: int, height: int) -> np.ndarray:
    points = payload.get("points", [])
    if not isinstance(points, list):
        raise RequestError("'points' must be a list when present")
    parsed = np.zeros((len(points), 3), dtype=np.float32)
    for i, entry in enumerate(points):
        if not isinstance(entry, dict):
            raise RequestError(f"points[{i}]: expected an object with x, y, label")
        try:
            x = _number(entry.get("x"))
            y = _number(entry.get("y"))
        except RequestError as exc:
            raise RequestError(f"points[{i}]: {exc}") from exc
        label = entry.get("label")
        if label not in (POSITIVE, NEGATIVE):
            raise RequestError(
                f"points[{i}]: label must be '{POSITIVE}' or '{NEGATIVE}', got {label!r}")
        if not (0 <= x <= width and 0 <= y <= height):
            raise RequestError(
                f"points[{i}]: ({x}, {y}) exceeds the {width}x{height} image bounds")
        parsed[i] = (x, y, 1.0 if label == POSITIVE else 0.0)
    return parsed


def parse_segment_payload(payload) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Validate one decoded request body; returns (image_u8, boxes, points).

    Raises RequestError (status 400) on the first violation found.
    """
    if not isinstance(payload, dict):
        raise RequestError("request body must be a JSON object")
    image = _parse_image(payload)
    height, width = image.shape
    boxes = _parse_boxes(payload, width, height)
    points = _parse_points(payload, width, height)
    return image, boxes, points


def run_inference(model: InferenceModel, image_u8: np.ndarray,
                  boxes: np.ndarray, points: np.ndarray) -> list[str]:
    """One full inference pass: returns base64 PNG payloads, one per box."""
    height, width = image_u8.shape
    image01 = image_u8.astype(np.float32) / 255.0
    size = getattr(model, "input_size", None)
    emits_probs = bool(getattr(model, "emits_probabilities", False))
    if size:
        lb = plan_letterbox(width, height, size)
        raw = model.infer(letterbox_image(image01, lb),
                          letterbox_boxes(boxes, lb),
                          letterbox_points(points, lb))
    else:
        lb = None
        raw = model.infer(image01, boxes, points)
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim != 3 or raw.shape[0] != boxes.shape[0]:
        from .errors import InferenceError
        raise InferenceError(
            f"model returned shape {raw.shape} for {boxes.shape[0]} boxes")
    payloads = []
    for i in range(raw.shape[0]):
        png = adapt_model_output(raw[i], width, height,
                                 emits_probabilities=emits_probs, letterbox=lb)
        payloads.append(base64.b64encode(png).decode("ascii"))
    return payloads


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(config: BridgeConfig, model: InferenceModel) -> FastAPI:
    """Assemble the FastAPI application around one model instance."""
    import asyncio

    app = FastAPI(title="segbridge", openapi_url=None, docs_url=None, redoc_url=None)
    semaphore = asyncio.Semaphore(config.max_concurrent)

    @app.get("/v1/health")
    async def health():
        return {"status": "ok"}

    @app.post("/v1/segment")
    async def segment(request: Request):
        declared = request.headers.get("content-length", "")
        if declared.isdigit() and int(declared) > config.max_request_bytes:
            return _error(413, f"request body exceeds {config.max_request_bytes} bytes")
        body = await request.body()
        if len(body) > config.max_request_bytes:
            return _error(413, f"request body exceeds {config.max_request_bytes} bytes")
        try:
            payload = json.loads(body)
        except ValueError:
            return _error(400, "request body is not valid JSON")
        try:
            image, boxes, points = parse_segment_payload(payload)
        except RequestError as exc:
            return _error(exc.status, str(exc))
        try:
            async with semaphore:
                masks = await run_in_threadpool(run_inference, model,
                                                image, boxes, points)
        except Exception as exc:  # model-side failure on a valid request
            return _error(500, f"inference failed: {exc}")
        return {"masks": masks}

    return app
