"""Entry point: `bacon-sidecar --config backend.json`."""

from __future__ import annotations

import argparse

import uvicorn

from .app import create_app
from .config import BackendConfig, load_config


def serve(cfg: BackendConfig):
    app = create_app(cfg)
    uvicorn.run(app, host="0.0.0.0", port=cfg.port, log_level="info")


def main():
    parser = argparse.ArgumentParser(
        prog="bacon-sidecar", description="Model backend for the caption toolkit."
    )
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--mode", choices=["fake", "real"], help="override mode")
    parser.add_argument("--fixtures", help="fake-mode fixture table")
    parser.add_argument("--port", type=int, help="override port")
    args = parser.parse_args()

    cfg = load_config(args.config)
    if args.mode:
        cfg.mode = args.mode
    if args.fixtures:
        cfg.fixture_path = args.fixtures
    if args.port:
        cfg.port = args.port
    cfg.check()
    serve(cfg)


if __name__ == "__main__":
    main()
