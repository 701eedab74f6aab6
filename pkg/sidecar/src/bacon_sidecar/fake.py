"""Fake model set: deterministic stand-ins that need no weights.

The embedder hashes bag-of-words tokens (FNV-1a into 256 buckets,
counted, L2-normalized; empty text gives the zero vector). The region,
judge, crop, and QA roles replay a fixture table so scripted scenarios
are reproducible byte for byte.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

FAKE_DIM = 256

_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")


class UnknownFixtureError(KeyError):
    """No fixture entry covers the request (maps to HTTP 400)."""


def _fnv1a(token: str) -> int:
    h = 2166136261
    for byte in token.encode("utf-8"):
        h ^= byte
        h = (h * 16777619) & 0xFFFFFFFF
    return h


def embed_texts(texts: list[str]) -> list[list[float]]:
    out = []
    for text in texts:
        vec = np.zeros(FAKE_DIM, dtype=np.float64)
        for token in _TOKEN_SPLIT.split(text.lower()):
            if token:
                vec[_fnv1a(token) % FAKE_DIM] += 1.0
        norm = np.linalg.norm(vec)
        if norm > 0.0:
            vec /= norm
        out.append([float(v) for v in vec])
    return out


def _box_key(box: list[float]) -> str:
    return ",".join(f"{float(c):.4f}" for c in box)


class FakeModelSet:
    """Fixture-backed implementations of every endpoint role."""

    dim = FAKE_DIM

    def __init__(self, fixture_path: str | Path | None = None):
        fixtures: dict = {}
        if fixture_path:
            with open(fixture_path, encoding="utf-8") as fh:
                fixtures = json.load(fh)

        self._propose: dict[tuple[str, str], list[dict]] = {}
        self._known_images: set[str] = set()
        for entry in fixtures.get("propose", []):
            self._known_images.add(entry["image_id"])
            regions = sorted(
                entry.get("regions", []), key=lambda r: -float(r["confidence"])
            )
            self._propose[(entry["image_id"], entry["query"])] = [
                {"box": [float(c) for c in r["box"]], "confidence": float(r["confidence"])}
                for r in regions
            ]

        self._judge: dict[tuple[str, str, str], dict] = {}
        for entry in fixtures.get("judge", []):
            key = (entry["image_id"], _box_key(entry["box"]), entry["name"])
            self._judge[key] = {"keep": bool(entry["keep"]), "score": float(entry["score"])}

        self._crop: dict[tuple[str, str, str], float] = {}
        for entry in fixtures.get("score_crop", []):
            key = (entry["image_id"], _box_key(entry["box"]), entry["text"])
            self._crop[key] = float(entry["score"])

        self._qa: dict[tuple[str, str], str] = {}
        for entry in fixtures.get("qa", []):
            self._qa[(entry["context"], entry["question"])] = entry["answer"]

    def embed(self, texts: list[str]) -> list[list[float]]:
        return embed_texts(texts)

    def propose(self, image_id: str, query: str) -> list[dict]:
        if image_id not in self._known_images:
            raise UnknownFixtureError(f"unknown image_id {image_id!r}")
        return self._propose.get((image_id, query), [])

    def judge(self, image_id: str, box: list[float], name: str) -> dict:
        try:
            return self._judge[(image_id, _box_key(box), name)]
        except KeyError:
            raise UnknownFixtureError(
                f"no judge fixture for ({image_id!r}, {name!r})"
            ) from None

    def score_crop(self, image_id: str, box: list[float], text: str) -> float:
        try:
            return self._crop[(image_id, _box_key(box), text)]
        except KeyError:
            raise UnknownFixtureError(
                f"no crop fixture for ({image_id!r}, {text!r})"
            ) from None

    def answer(self, context: str, question: str) -> str:
        if not context.strip():
            return "unknown"
        try:
            return self._qa[(context, question)]
        except KeyError:
            raise UnknownFixtureError(f"no qa fixture for {question!r}") from None
