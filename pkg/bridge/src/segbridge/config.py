"""Server configuration.

The model source is either the literal string "mock" (the weight-free
deterministic model, no files touched) or a filesystem path to a
TorchScript checkpoint. Limits bound what one process will accept:
`max_concurrent` segmentation requests run at once (the rest queue),
and request bodies larger than `max_request_bytes` are rejected with
HTTP 413 before parsing.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

__all__ = ["BridgeConfig", "MOCK_SOURCE", "DEFAULT_PORT"]

MOCK_SOURCE = "mock"
DEFAULT_PORT = 8601


@dataclass(frozen=True)
class BridgeConfig:
    """Everything needed to stand up one bridge server."""

    model_source: str = MOCK_SOURCE
    host: str = "127.0.0.1"
    port: int = DEFAULT_PORT
    max_concurrent: int = 4
    max_request_bytes: int = 32 * 1024 * 1024

    def __post_init__(self):
        if not isinstance(self.model_source, str) or not self.model_source:
            raise ConfigError("BridgeConfig: model_source must be 'mock' or a checkpoint path")
        if not isinstance(self.port, int) or not (0 <= self.port <= 65535):
            raise ConfigError(f"BridgeConfig: port must be in [0, 65535], got {self.port}")
        if self.max_concurrent < 1:
            raise ConfigError(
                f"BridgeConfig: max_concurrent must be >= 1, got {self.max_concurrent}")
        if self.max_request_bytes < 1:
            raise ConfigError(
                f"BridgeConfig: max_request_bytes must be >= 1, got {self.max_request_bytes}")

    @property
    def is_mock(self) -> bool:
        return self.model_source == MOCK_SOURCE
