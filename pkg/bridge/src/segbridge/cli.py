"""Command-line entry point: stand up one bridge server.

Exactly one model source is required: ``--mock`` for the weight-free
deterministic model, or ``--model PATH`` for a TorchScript checkpoint.

Exit codes: 0 clean shutdown, 2 usage error, 3 startup failure (model
not loadable, port not bindable).
"""

from __future__ import annotations

import argparse
import sys

import uvicorn

from .app import create_app
from .config import DEFAULT_PORT, MOCK_SOURCE, BridgeConfig
from .errors import ConfigError, ModelLoadError
from .models import InferenceModel, load_model

__all__ = ["main", "build_server"]


def build_server(config: BridgeConfig, model: InferenceModel | None = None,
                 log_level: str = "info") -> uvicorn.Server:
    """A ready-to-run uvicorn server; tests may inject the model."""
    if model is None:
        model = load_model(config)
    app = create_app(config, model)
    return uvicorn.Server(uvicorn.Config(
        app, host=config.host, port=config.port,
        log_level=log_level, access_log=False))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segbridge",
        description="HTTP inference server for promptable segmentation "
                    "(wire protocol v1)")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--mock", action="store_true",
                        help="serve the deterministic weight-free mock model")
    source.add_argument("--model", metavar="PATH",
                        help="TorchScript checkpoint to serve")
    parser.add_argument("--host", default="127.0.0.1", help="bind address")
    parser.add_argument("--port", type=int, default=DEFAULT_PORT, help="bind port")
    parser.add_argument("--max-concurrent", type=int, default=4,
                        help="segmentation requests allowed in flight at once")
    parser.add_argument("--max-request-bytes", type=int, default=32 * 1024 * 1024,
                        help="largest accepted request body")
    parser.add_argument("--log-level", default="info",
                        choices=("critical", "error", "warning", "info", "debug"),
                        help="server log verbosity")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = BridgeConfig(
            model_source=MOCK_SOURCE if args.mock else args.model,
            host=args.host, port=args.port,
            max_concurrent=args.max_concurrent,
            max_request_bytes=args.max_request_bytes)
    except ConfigError as exc:
        print(f"segbridge: {exc}", file=sys.stderr)
        return 2
    try:
        server = build_server(config, log_level=args.log_level)
    except ModelLoadError as exc:
        print(f"segbridge: {exc}", file=sys.stderr)
        return 3
    try:
        server.run()
    except SystemExit:  # uvicorn startup failure (e.g. port in use)
        print(f"segbridge: could not start on {config.host}:{config.port}",
              file=sys.stderr)
        return 3
    return 0
