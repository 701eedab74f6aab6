"""JSONL corpus ingestion, persistence, and distribution statistics for
caption-graph collections.

One record per line: {"image_id": ..., "image_ref": ..., "caption": {...}}
with the caption in the canonical JSON schema. Loading streams records
and reports malformed lines by line number instead of aborting the whole
file (pass an error sink to collect them).
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import SchemaError
from .format import from_json, to_json
from .model import CaptionGraph, category_head

# auxiliaries stripped before taking a predicate's head word
_PREDICATE_STOP_WORDS = frozenset(
    {"is", "are", "was", "were", "am", "be", "been", "being"}
)


@dataclass
class DatasetRecord:
    image_id: str
    caption: CaptionGraph
    image_ref: str | None = None


@dataclass(frozen=True)
class LineError:
    line: int
    message: str


@dataclass
class CorpusStats:
    images: int
    objects: int
    relationships: int
    categories: list[tuple[str, int]] = field(default_factory=list)
    name_heads: list[tuple[str, int]] = field(default_factory=list)
    predicates: list[tuple[str, int]] = field(default_factory=list)

    def to_jsonable(self) -> dict:
        return {
            "totals": {
                "images": self.images,
                "objects": self.objects,
                "relationships": self.relationships,
            },
            "categories": [[t, c] for t, c in self.categories],
            "name_heads": [[t, c] for t, c in self.name_heads],
            "predicates": [[t, c] for t, c in self.predicates],
        }


def record_to_json(record: DatasetRecord) -> str:
    image_ref = json.dumps(record.image_ref, ensure_ascii=False)
    return (
        f'{{"image_id":{json.dumps(record.image_id, ensure_ascii=False)},'
        f'"image_ref":{image_ref},"caption":{to_json(record.caption)}}}'
    )


def record_from_json(line: str) -> DatasetRecord:
    try:
        data = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaError("/", f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise SchemaError("/", "expected object")
    for key in ("image_id", "image_ref", "caption"):
        if key not in data:
            raise SchemaError(f"/{key}", "missing key")
    for key in data:
        if key not in ("image_id", "image_ref", "caption"):
            raise SchemaError(f"/{key}", "unexpected key")
    if not isinstance(data["image_id"], str) or not data["image_id"]:
        raise SchemaError("/image_id", "must be a non-empty string")
    if data["image_ref"] is not None and not isinstance(data["image_ref"], str):
        raise SchemaError("/image_ref", "must be a string or null")
    try:
        caption = from_json(json.dumps(data["caption"]))
    except SchemaError as exc:
        raise SchemaError(f"/caption{exc.path}", exc.detail) from None
    return DatasetRecord(data["image_id"], caption, data["image_ref"])


def record_hash(record: DatasetRecord) -> str:
    """Content hash of the canonical record encoding, for dedup."""
    return hashlib.sha256(record_to_json(record).encode("utf-8")).hexdigest()


def load_jsonl(
    path: str | Path, errors: list[LineError] | None = None
) -> Iterator[DatasetRecord]:
    """Stream records from a JSONL file.

    Malformed lines raise SchemaError annotated with the line number,
    unless ``errors`` is given, in which case they are collected there
    and skipped. Duplicate image ids are malformed.
    """
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = record_from_json(line)
                if record.image_id in seen_ids:
                    raise SchemaError("/image_id", f"duplicate image_id {record.image_id!r}")
                seen_ids.add(record.image_id)
            except SchemaError as exc:
                if errors is None:
                    raise SchemaError(exc.path, f"line {line_no}: {exc.detail}") from None
                errors.append(LineError(line_no, str(exc)))
                continue
            yield record


def write_jsonl(records: Iterable[DatasetRecord], path: str | Path):
    """Byte-deterministic JSONL given the record order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(record_to_json(record))
            fh.write("\n")


def predicate_head(predicate: str) -> str:
    """First whitespace token after auxiliary stripping; falls back to
    the first token when everything is an auxiliary."""
    tokens = predicate.lower().split()
    if not tokens:
        return ""
    for token in tokens:
        if token not in _PREDICATE_STOP_WORDS:
            return token
    return tokens[0]


def corpus_stats(records: Iterable[DatasetRecord], top_n: int) -> CorpusStats:
    """Top categories, object-name head nouns, and predicate head words,
    each sorted by count descending then term ascending."""
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    categories: Counter[str] = Counter()
    name_heads: Counter[str] = Counter()
    predicates: Counter[str] = Counter()
    images = objects = relationships = 0
    for record in records:
        images += 1
        for entry in record.caption.objects:
            objects += 1
            categories[entry.category] += 1
            name_heads[category_head(entry.name)] += 1
        for triplet in record.caption.relationships:
            relationships += 1
            head = predicate_head(triplet.predicate)
            if head:
                predicates[head] += 1

    def top(counter: Counter[str]) -> list[tuple[str, int]]:
        return sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))[:top_n]

    return CorpusStats(
        images=images,
        objects=objects,
        relationships=relationships,
        categories=top(categories),
        name_heads=top(name_heads),
        predicates=top(predicates),
    )
