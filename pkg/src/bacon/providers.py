"""Pluggable model backends: text embedder, region proposer, region judge,
crop scorer, and QA model.

Two wirings ship with the toolkit: deterministic in-process stubs (the
default, used by the whole offline test suite) and an HTTP client that
speaks the sidecar wire protocol. The stub embedder is a hashed
bag-of-words, so every similarity in a test can be computed by hand; the
other stubs replay scripted fixture tables rather than approximating any
real model.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .errors import BackendUnavailableError, DimensionMismatchError
from .geometry import Box

EmbeddingVector = np.ndarray

STUB_EMBED_DIM = 256

_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")
_FNV_OFFSET = 2166136261
_FNV_PRIME = 16777619


def _fnv1a(token: str) -> int:
    h = _FNV_OFFSET
    for byte in token.encode("utf-8"):
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFF
    return h


def tokenize(text: str) -> list[str]:
    """Lowercase and split on runs of non-alphanumeric characters."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity of two pre-normalized vectors.

    Identical vectors score exactly 1.0 (including two zero vectors,
    i.e. two empty texts); a zero vector scores 0 against anything else.
    """
    if a.shape != b.shape:
        raise DimensionMismatchError(f"embedding dims {a.shape} vs {b.shape}")
    if np.array_equal(a, b):
        return 1.0
    return float(np.clip(np.dot(a, b), -1.0, 1.0))


@dataclass(frozen=True)
class ProposedRegion:
    """Candidate region from the proposer, confidence in [0,1]."""

    box: Box
    detector_confidence: float

    def __post_init__(self):
        if not 0.0 <= self.detector_confidence <= 1.0:
            raise ValueError(f"confidence {self.detector_confidence} outside [0,1]")


class TextEmbedder(Protocol):
    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]: ...


class RegionProposer(Protocol):
    def propose_regions(self, image, query: str) -> list[ProposedRegion]: ...


class RegionJudge(Protocol):
    def judge_region(self, image, box: Box, name: str) -> tuple[bool, float]: ...


class CropEmbedder(Protocol):
    def score_crop(self, image, box: Box, description: str) -> float: ...


class QAModel(Protocol):
    def answer(self, context: str, question: str) -> str: ...


class StubTextEmbedder:
    """Hashed bag-of-words embedder: FNV-1a tokens into 256 buckets,
    count, L2-normalize. Empty text maps to the all-zero vector."""

    dim = STUB_EMBED_DIM

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        out = []
        for text in texts:
            vec = np.zeros(self.dim, dtype=np.float64)
            for token in tokenize(text):
                vec[_fnv1a(token) % self.dim] += 1.0
            norm = np.linalg.norm(vec)
            if norm > 0.0:
                vec /= norm
            vec.setflags(write=False)
            out.append(vec)
        return out


def _box_key(box: Box) -> str:
    return ",".join(f"{c:.4f}" for c in box.as_list())


class StubProviderSet:
    """All five provider roles backed by a scripted fixture table.

    Fixture schema (JSON object, every section optional):
      propose:    [{"image_id", "query", "regions": [{"box", "confidence"}]}]
      judge:      [{"image_id", "box", "name", "keep", "score"}]
      score_crop: [{"image_id", "box", "text", "score"}]
      qa:         [{"context", "question", "answer"}]
    Boxes are [x1,y1,x2,y2]; lookups match boxes at 4-decimal precision.
    """

    def __init__(self, fixtures: dict | None = None):
        fixtures = fixtures or {}
        self.text_embedder = StubTextEmbedder()
        self.crop_embedder = self
        self.region_proposer = self
        self.region_judge = self
        self.qa_model = self

        self._propose: dict[tuple[str, str], list[ProposedRegion]] = {}
        self._known_images: set[str] = set()
        for entry in fixtures.get("propose", []):
            regions = [
                ProposedRegion(Box.from_list(r["box"]), float(r["confidence"]))
                for r in entry.get("regions", [])
            ]
            self._known_images.add(entry["image_id"])
            self._propose[(entry["image_id"], entry["query"])] = regions

        self._judge: dict[tuple[str, str, str], tuple[bool, float]] = {}
        for entry in fixtures.get("judge", []):
            key = (entry["image_id"], _box_key(Box.from_list(entry["box"])), entry["name"])
            self._judge[key] = (bool(entry["keep"]), float(entry["score"]))

        self._crop: dict[tuple[str, str, str], float] = {}
        for entry in fixtures.get("score_crop", []):
            key = (entry["image_id"], _box_key(Box.from_list(entry["box"])), entry["text"])
            self._crop[key] = float(entry["score"])

        self._qa: dict[tuple[str, str], str] = {}
        for entry in fixtures.get("qa", []):
            self._qa[(entry["context"], entry["question"])] = entry["answer"]

    @classmethod
    def from_file(cls, path: str | Path) -> "StubProviderSet":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        return self.text_embedder.embed(texts)

    def propose_regions(self, image, query: str) -> list[ProposedRegion]:
        if image not in self._known_images:
            raise BackendUnavailableError(f"no proposal fixture for image {image!r}")
        regions = self._propose.get((image, query), [])
        return sorted(regions, key=lambda r: -r.detector_confidence)

    def judge_region(self, image, box: Box, name: str) -> tuple[bool, float]:
        try:
            return self._judge[(image, _box_key(box), name)]
        except KeyError:
            raise BackendUnavailableError(
                f"no judge fixture for ({image!r}, {_box_key(box)}, {name!r})"
            ) from None

    def score_crop(self, image, box: Box, description: str) -> float:
        try:
            return self._crop[(image, _box_key(box), description)]
        except KeyError:
            raise BackendUnavailableError(
                f"no crop fixture for ({image!r}, {_box_key(box)}, {description!r})"
            ) from None

    def answer(self, context: str, question: str) -> str:
        if not context.strip():
            return "unknown"
        try:
            return self._qa[(context, question)]
        except KeyError:
            raise BackendUnavailableError(
                f"no qa fixture for question {question!r}"
            ) from None


class HttpProviderSet:
    """Client for the sidecar wire protocol (JSON over HTTP).

    All endpoints are read-only, so failed calls are retried a bounded
    number of times before raising BackendUnavailableError. The
    embedding dimension is taken from the /v1/health handshake and every
    /v1/embed response is checked against it.
    """

    def __init__(self, endpoint: str, retries: int = 2, timeout: float = 30.0):
        import requests

        self._requests = requests
        self.endpoint = endpoint.rstrip("/")
        self.retries = retries
        self.timeout = timeout
        self.dim = self._handshake()

        self.text_embedder = self
        self.crop_embedder = self
        self.region_proposer = self
        self.region_judge = self
        self.qa_model = self

    def _handshake(self) -> int:
        reply = self._call("GET", "/v1/health", None)
        if not reply.get("ok"):
            raise BackendUnavailableError(f"backend at {self.endpoint} not healthy")
        return int(reply["dim"])

    def _call(self, method: str, path: str, payload: dict | None) -> dict:
        url = self.endpoint + path
        last_error: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                if method == "GET":
                    resp = self._requests.get(url, timeout=self.timeout)
                else:
                    resp = self._requests.post(url, json=payload, timeout=self.timeout)
                if resp.status_code != 200:
                    raise BackendUnavailableError(
                        f"{path} returned HTTP {resp.status_code}: {resp.text[:200]}"
                    )
                return resp.json()
            except self._requests.RequestException as exc:
                last_error = exc
        raise BackendUnavailableError(f"{path} unreachable: {last_error}")

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        reply = self._call("POST", "/v1/embed", {"texts": list(texts)})
        if int(reply["dim"]) != self.dim:
            raise DimensionMismatchError(
                f"backend changed embedding dim {reply['dim']} != {self.dim}"
            )
        vectors = []
        for row in reply["vectors"]:
            vec = np.asarray(row, dtype=np.float64)
            if vec.shape != (self.dim,):
                raise DimensionMismatchError(f"vector length {vec.shape} != {self.dim}")
            vec.setflags(write=False)
            vectors.append(vec)
        if len(vectors) != len(texts):
            raise BackendUnavailableError("embed returned wrong vector count")
        return vectors

    def propose_regions(self, image, query: str) -> list[ProposedRegion]:
        reply = self._call("POST", "/v1/propose", {"image_id": image, "query": query})
        regions = [
            ProposedRegion(Box.from_list(r["box"]), float(r["confidence"]))
            for r in reply["regions"]
        ]
        return sorted(regions, key=lambda r: -r.detector_confidence)

    def judge_region(self, image, box: Box, name: str) -> tuple[bool, float]:
        reply = self._call(
            "POST", "/v1/judge", {"image_id": image, "box": box.as_list(), "name": name}
        )
        return bool(reply["keep"]), float(reply["score"])

    def score_crop(self, image, box: Box, description: str) -> float:
        reply = self._call(
            "POST",
            "/v1/score_crop",
            {"image_id": image, "box": box.as_list(), "text": description},
        )
        return float(reply["score"])

    def answer(self, context: str, question: str) -> str:
        reply = self._call("POST", "/v1/qa", {"context": context, "question": question})
        return str(reply["answer"])


@dataclass
class ProviderSet:
    """Handles for the five provider roles used across the toolkit."""

    text_embedder: TextEmbedder
    crop_embedder: CropEmbedder
    region_proposer: RegionProposer
    region_judge: RegionJudge
    qa_model: QAModel

    @classmethod
    def stub(cls, fixtures: dict | str | Path | None = None) -> "ProviderSet":
        if isinstance(fixtures, (str, Path)):
            backend = StubProviderSet.from_file(fixtures)
        else:
            backend = StubProviderSet(fixtures)
        return cls(backend, backend, backend, backend, backend)

    @classmethod
    def http(cls, endpoint: str) -> "ProviderSet":
        backend = HttpProviderSet(endpoint)
        return cls(backend, backend, backend, backend, backend)
