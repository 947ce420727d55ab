"""Error taxonomy for the bridge server.

RequestError covers anything the client got wrong (malformed body,
invalid prompts); it carries the HTTP status the handler should emit.
InferenceError covers model-side failures after a valid request (shape
mismatches, runtime faults) and always maps to HTTP 500.
ModelLoadError is a startup failure: the configured checkpoint cannot
be loaded.
"""

from __future__ import annotations

__all__ = ["BridgeError", "ConfigError", "ModelLoadError", "RequestError", "InferenceError"]


class BridgeError(Exception):
    """Base class for everything this package raises on purpose."""


class ConfigError(BridgeError):
    """Invalid server configuration."""


class ModelLoadError(BridgeError):
    """The configured model source cannot be loaded."""


class RequestError(BridgeError):
    """A client request that violates the wire contract."""

    def __init__(self, message: str, status: int = 400):
        super().__init__(message)
        self.status = status


class InferenceError(BridgeError):
    """The model produced output the server cannot adapt."""
