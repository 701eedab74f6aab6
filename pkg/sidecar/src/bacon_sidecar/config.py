"""Sidecar configuration: JSON file plus environment overrides for the
port and device."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

ENV_PORT = "BACON_SIDECAR_PORT"
ENV_DEVICE = "BACON_SIDECAR_DEVICE"


@dataclass
class ModelIds:
    """Hub identifiers for real-model mode, one per endpoint role."""

    text_embedder: str = "openai/clip-vit-base-patch32"
    crop_scorer: str = "openai/clip-vit-base-patch32"
    region_proposer: str = "google/owlvit-base-patch32"
    qa: str = "google/flan-t5-small"


@dataclass
class BackendConfig:
    mode: str = "fake"  # "fake" | "real"
    port: int = 8750
    device: str = "cpu"
    image_root: str = "."
    fixture_path: str | None = None  # fake-mode fixture table
    judge_threshold: float = 0.2  # real-mode judge: min crop similarity
    models: ModelIds = field(default_factory=ModelIds)

    def check(self):
        if self.mode not in ("fake", "real"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0 < self.port < 65536:
            raise ValueError(f"invalid port {self.port}")
        if not Path(self.image_root).is_dir():
            raise ValueError(f"image root {self.image_root!r} does not exist")


def load_config(path: str | None = None) -> BackendConfig:
    cfg = BackendConfig()
    if path:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        models = ModelIds(**data.pop("models", {}))
        cfg = BackendConfig(models=models, **data)
    if ENV_PORT in os.environ:
        cfg.port = int(os.environ[ENV_PORT])
    if ENV_DEVICE in os.environ:
        cfg.device = os.environ[ENV_DEVICE]
    cfg.check()
    return cfg
