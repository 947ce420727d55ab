"""HTTP client for segmentation backends speaking the v1 wire protocol.

POST {endpoint}/v1/segment with
    {"image": "<base64 8-bit PNG>",
     "boxes": [[x0, y0, x1, y1], ...],
     "points": [{"x": f, "y": f, "label": "positive"|"negative"}, ...]}
answers {"masks": ["<base64 16-bit grayscale PNG>", ...]}, one mask per
box in request order. GET {endpoint}/v1/health answers {"status":"ok"}.

Transient transport failures are retried with exponential backoff
(base 200 ms, factor 2). HTTP-level failures are not retried: the
server answered, and it said no.
"""

from __future__ import annotations

import base64
import json
import os
import time
from dataclasses import dataclass
from typing import Sequence

import httpx

from .errors import BackendError, DecodeError, DomainError, ProtocolError, TransportError
from .pngio import decode_prob_png, encode_image_png
from .prompts import BBox, PointPrompt
from .raster import ImageRaster, ProbMask
from .segmenter import Segmenter

__all__ = [
    "ENDPOINT_ENV",
    "SegmentRequest",
    "SegmentResponse",
    "remote_segment",
    "health",
    "RemoteSegmenter",
]

ENDPOINT_ENV = "UNCERSEG_ENDPOINT"
DEFAULT_POOL_SIZE = 4
BACKOFF_BASE_S = 0.2


@dataclass(frozen=True)
class SegmentRequest:
    """One wire request: an encoded image plus prompts."""

    image_png: bytes
    boxes: tuple[BBox, ...]
    points: tuple[PointPrompt, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))
        object.__setattr__(self, "points", tuple(self.points))
        if len(self.boxes) < 1:
            raise DomainError("SegmentRequest: at least one box is required")

    def body(self) -> dict:
        return {
            "image": base64.b64encode(self.image_png).decode("ascii"),
            "boxes": [list(b.as_tuple()) for b in self.boxes],
            "points": [{"x": p.x, "y": p.y, "label": p.label} for p in self.points],
        }


@dataclass(frozen=True)
class SegmentResponse:
    """One wire response: 16-bit PNG payloads, one per requested box."""

    masks: tuple[bytes, ...]


def _segment_url(endpoint: str) -> str:
    return endpoint.rstrip("/") + "/v1/segment"


def remote_segment(endpoint: str, request: SegmentRequest,
                   timeout: float = 30.0, retries: int = 3,
                   backoff_base_s: float = BACKOFF_BASE_S,
                   client: httpx.Client | None = None) -> SegmentResponse:
    """Submit one request; returns the raw per-box mask payloads.

    retries counts additional attempts after the first, applied only to
    transport failures (connect errors, timeouts, dropped connections).
    """
    body = request.body()
    own_client = client is None
    if own_client:
        client = httpx.Client()
    try:
        attempt = 0
        while True:
            try:
                resp = client.post(_segment_url(endpoint), json=body, timeout=timeout)
                break
            except httpx.TransportError as exc:
                if attempt >= retries:
                    raise TransportError(
                        f"{endpoint}: transport failure after {attempt + 1} attempts: {exc}"
                    ) from exc
                time.sleep(backoff_base_s * (2 ** attempt))
                attempt += 1
    finally:
        if own_client:
            client.close()

    if resp.status_code >= 400:
        detail = resp.text[:500]
        try:
            detail = resp.json().get("error", detail)
        except (json.JSONDecodeError, ValueError, AttributeError):
            pass
        raise BackendError(f"{endpoint}: backend returned HTTP {resp.status_code}: {detail}")

    try:
        payload = resp.json()
    except (json.JSONDecodeError, ValueError) as exc:
        raise ProtocolError(f"{endpoint}: response body is not JSON") from exc
    masks = payload.get("masks") if isinstance(payload, dict) else None
    if not isinstance(masks, list):
        raise ProtocolError(f"{endpoint}: response lacks a 'masks' list")
    if len(masks) != len(request.boxes):
        raise ProtocolError(f"{endpoint}: expected {len(request.boxes)} masks, "
                            f"got {len(masks)}")
    decoded = []
    for i, entry in enumerate(masks):
        try:
            decoded.append(base64.b64decode(entry, validate=True))
        except (TypeError, ValueError) as exc:
            raise ProtocolError(f"{endpoint}: mask {i} is not valid base64") from exc
    return SegmentResponse(tuple(decoded))


def health(endpoint: str, timeout: float = 5.0) -> bool:
    """True iff GET /v1/health answers {"status": "ok"}."""
    url = endpoint.rstrip("/") + "/v1/health"
    try:
        resp = httpx.get(url, timeout=timeout)
        return resp.status_code == 200 and resp.json().get("status") == "ok"
    except (httpx.HTTPError, json.JSONDecodeError, ValueError):
        return False


class RemoteSegmenter(Segmenter):
    """Segmenter backed by a remote inference server.

    Holds a bounded connection pool and is safe for concurrent
    segment_one calls. Close explicitly or use as a context manager.
    """

    supports_points = True
    max_boxes_per_call = 1

    def __init__(self, endpoint: str | None = None, timeout: float = 30.0,
                 retries: int = 3, pool_size: int = DEFAULT_POOL_SIZE,
                 backoff_base_s: float = BACKOFF_BASE_S):
        endpoint = endpoint or os.environ.get(ENDPOINT_ENV)
        if not endpoint:
            raise DomainError(
                f"RemoteSegmenter: no endpoint given and {ENDPOINT_ENV} is unset")
        self.endpoint = endpoint
        self._timeout = timeout
        self._retries = retries
        self._backoff_base_s = backoff_base_s
        limits = httpx.Limits(max_connections=pool_size,
                              max_keepalive_connections=pool_size)
        self._client = httpx.Client(limits=limits)

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "RemoteSegmenter":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def segment_one(self, image: ImageRaster, box: BBox,
                    points: Sequence[PointPrompt]) -> ProbMask:
        request = SegmentRequest(encode_image_png(image), (box,), tuple(points))
        response = remote_segment(self.endpoint, request, timeout=self._timeout,
                                  retries=self._retries,
                                  backoff_base_s=self._backoff_base_s,
                                  client=self._client)
        try:
            mask = decode_prob_png(response.masks[0])
        except DecodeError as exc:
            raise ProtocolError(f"{self.endpoint}: mask payload is not a valid "
                                f"16-bit PNG ({exc})") from exc
        if mask.width != image.width or mask.height != image.height:
            raise ProtocolError(
                f"{self.endpoint}: mask is {mask.width}x{mask.height} but the "
                f"image is {image.width}x{image.height}")
        return mask
