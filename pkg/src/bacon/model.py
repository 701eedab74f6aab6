"""Caption-graph domain types and pure graph operations.

A caption graph has three parts: ordered overall-description sections,
an ordered object list, and directed relationship triplets between
named objects. Object mentions inside overall text are written as
``<name>`` markers. All operations here are pure functions over the
types; serialization lives in :mod:`bacon.format`.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .errors import UnbalancedMarkerError
from .geometry import Box, MaskRLE
from .providers import TextEmbedder, cosine

SENTENCE_BOUNDARIES = ".!?;\n"

DEFAULT_TAU_INVERSE = 0.95


@dataclass(frozen=True)
class OverallSection:
    """One subtitled block of the overall description."""

    subtitle: str
    text: str


@dataclass(frozen=True)
class ObjectEntry:
    """Named object instance: category, free-text description, color,
    and optional grounding geometry."""

    name: str
    category: str
    description: str
    color: str
    box: Box | None = None
    mask: MaskRLE | None = None


@dataclass(frozen=True)
class RelationTriplet:
    """Directed (subject, predicate, object) edge between object names."""

    subject: str
    predicate: str
    object: str


@dataclass
class CaptionGraph:
    overall: list[OverallSection] = field(default_factory=list)
    objects: list[ObjectEntry] = field(default_factory=list)
    relationships: list[RelationTriplet] = field(default_factory=list)

    def object_names(self) -> list[str]:
        return [o.name for o in self.objects]

    def find_object(self, name: str) -> ObjectEntry | None:
        for entry in self.objects:
            if entry.name == name:
                return entry
        return None


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Violation:
    severity: Severity
    section: str  # "overall" | "objects" | "relationships"
    index: int  # element index within the section, -1 for section-level
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        """True when no error-severity violation is present."""
        return not any(v.severity is Severity.ERROR for v in self.violations)

    def to_jsonable(self) -> list[dict]:
        return [
            {
                "severity": v.severity.value,
                "section": v.section,
                "index": v.index,
                "message": v.message,
            }
            for v in self.violations
        ]


def split_sentences(text: str) -> list[str]:
    """Split on '.', '!', '?', ';' and newline; the punctuation stays
    with its sentence, surrounding whitespace is stripped."""
    sentences: list[str] = []
    buf: list[str] = []
    for ch in text:
        buf.append(ch)
        if ch in SENTENCE_BOUNDARIES:
            part = "".join(buf).strip()
            if part:
                sentences.append(part)
            buf = []
    tail = "".join(buf).strip()
    if tail:
        sentences.append(tail)
    return sentences


def mentioned_objects(text: str) -> list[str]:
    """Object names mentioned as ``<name>`` markers, in order of first
    appearance, duplicates removed."""
    names: list[str] = []
    seen: set[str] = set()
    open_pos: int | None = None
    for i, ch in enumerate(text):
        if ch == "<":
            if open_pos is not None:
                raise UnbalancedMarkerError(f"nested '<' at offset {i}")
            open_pos = i
        elif ch == ">":
            if open_pos is None:
                raise UnbalancedMarkerError(f"'>' without '<' at offset {i}")
            name = text[open_pos + 1 : i].strip()
            if name not in seen:
                seen.add(name)
                names.append(name)
            open_pos = None
    if open_pos is not None:
        raise UnbalancedMarkerError(f"'<' at offset {open_pos} never closed")
    return names


def strip_sentences_mentioning(text: str, names: Iterable[str]) -> str:
    """Drop every sentence that mentions any of ``names``; the survivors
    are rejoined with single spaces in their original order."""
    markers = [f"<{n}>" for n in names]
    kept = [
        s
        for s in split_sentences(text)
        if not any(m in s for m in markers)
    ]
    return " ".join(kept)


def dedupe_relationships(
    triplets: Sequence[RelationTriplet],
    embedder: TextEmbedder | None = None,
    tau_inv: float = DEFAULT_TAU_INVERSE,
) -> tuple[list[RelationTriplet], list[RelationTriplet]]:
    """Remove duplicate relationships, keeping first occurrences.

    Exact duplicates are always removed. With an embedder, a later
    triplet whose unordered endpoints match an earlier one and whose
    predicate embedding has cosine >= tau_inv against the earlier
    predicate is also dropped (catches two-way restatements like
    (a,[holds],b) / (b,[holds],a)).
    """
    if embedder is not None and not 0.0 <= tau_inv <= 1.0:
        raise ValueError(f"tau_inv {tau_inv} outside [0,1]")

    vectors = {}
    if embedder is not None:
        predicates = sorted({t.predicate for t in triplets})
        for pred, vec in zip(predicates, embedder.embed(predicates)):
            vectors[pred] = vec

    kept: list[RelationTriplet] = []
    dropped: list[RelationTriplet] = []
    for triplet in triplets:
        duplicate = False
        for earlier in kept:
            if (earlier.subject, earlier.predicate, earlier.object) == (
                triplet.subject,
                triplet.predicate,
                triplet.object,
            ):
                duplicate = True
                break
            if embedder is not None and {earlier.subject, earlier.object} == {
                triplet.subject,
                triplet.object,
            }:
                if cosine(vectors[earlier.predicate], vectors[triplet.predicate]) >= tau_inv:
                    duplicate = True
                    break
        (dropped if duplicate else kept).append(triplet)
    return kept, dropped


def category_head(name: str) -> str:
    """Strip the trailing 1-based index from an object name:
    'person 2' -> 'person', 'dog' -> 'dog'."""
    head, _, tail = name.rpartition(" ")
    if head and tail.isdigit():
        return head
    return name


def name_index(name: str) -> int | None:
    """Trailing 1-based index of an object name, or None for bare names."""
    head, _, tail = name.rpartition(" ")
    if head and tail.isdigit():
        return int(tail)
    return None


def canonical_numbering(objects: Sequence[ObjectEntry]) -> list[ObjectEntry]:
    """Rewrite names to '<category> <k>', k being the 1-based order of
    appearance within each category. Idempotent."""
    counters: dict[str, int] = {}
    out: list[ObjectEntry] = []
    for entry in objects:
        if not entry.category:
            raise ValueError(f"object {entry.name!r} has an empty category")
        k = counters.get(entry.category, 0) + 1
        counters[entry.category] = k
        out.append(replace(entry, name=f"{entry.category} {k}"))
    return out


def renumber_graph(graph: CaptionGraph) -> CaptionGraph:
    """Graph-level renumbering: canonical object names plus consistent
    rewriting of relationship endpoints and overall-text mentions."""
    renamed = canonical_numbering(graph.objects)
    mapping = {old.name: new.name for old, new in zip(graph.objects, renamed)}

    def map_name(name: str) -> str:
        return mapping.get(name, name)

    relationships = [
        RelationTriplet(map_name(t.subject), t.predicate, map_name(t.object))
        for t in graph.relationships
    ]
    marker = re.compile(r"<([^<>]*)>")
    overall = [
        OverallSection(
            s.subtitle,
            marker.sub(lambda m: f"<{map_name(m.group(1).strip())}>", s.text),
        )
        for s in graph.overall
    ]
    return CaptionGraph(overall=overall, objects=renamed, relationships=relationships)


_RESERVED_IN_MENTION_TEXT = "%&()[];"


def validate(graph: CaptionGraph) -> ValidationReport:
    """Check every graph invariant; violations are data, ordered by
    (section, index). Self-relations are warnings, everything else an
    error."""
    violations: list[Violation] = []

    def add(severity: Severity, section: str, index: int, message: str):
        violations.append(Violation(severity, section, index, message))

    known = set(graph.object_names())

    if not graph.overall:
        add(Severity.ERROR, "overall", -1, "overall empty")
    for i, section in enumerate(graph.overall):
        if not section.subtitle.strip():
            add(Severity.ERROR, "overall", i, "empty subtitle")
        bad = sorted(set(section.text) & set(_RESERVED_IN_MENTION_TEXT))
        if bad:
            add(
                Severity.ERROR,
                "overall",
                i,
                f"reserved character(s) {''.join(bad)!r} in overall text",
            )
        try:
            for name in mentioned_objects(section.text):
                if name not in known:
                    add(Severity.ERROR, "overall", i, f"unknown mention {name}")
        except UnbalancedMarkerError as exc:
            add(Severity.ERROR, "overall", i, f"unbalanced marker: {exc}")

    if not graph.objects:
        add(Severity.ERROR, "objects", -1, "object list empty")
    seen_names: set[str] = set()
    by_category: dict[str, list[tuple[int, ObjectEntry]]] = {}
    for i, entry in enumerate(graph.objects):
        if not entry.name.strip():
            add(Severity.ERROR, "objects", i, "empty object name")
        if entry.name in seen_names:
            add(Severity.ERROR, "objects", i, f"duplicate name {entry.name}")
        seen_names.add(entry.name)
        by_category.setdefault(entry.category, []).append((i, entry))
    for category, members in by_category.items():
        if len(members) < 2:
            continue
        indices_seen: set[int] = set()
        for i, entry in members:
            idx = name_index(entry.name)
            if idx is None:
                add(
                    Severity.ERROR,
                    "objects",
                    i,
                    f"{entry.name} shares category {category} but carries no index",
                )
            elif idx in indices_seen:
                add(
                    Severity.ERROR,
                    "objects",
                    i,
                    f"{entry.name} repeats index {idx} within category {category}",
                )
            else:
                indices_seen.add(idx)

    for i, triplet in enumerate(graph.relationships):
        if not triplet.predicate.strip():
            add(Severity.ERROR, "relationships", i, "empty predicate")
        for endpoint in (triplet.subject, triplet.object):
            if endpoint not in known:
                add(Severity.ERROR, "relationships", i, f"unknown endpoint {endpoint}")
        if triplet.subject == triplet.object:
            add(Severity.WARNING, "relationships", i, f"self-relation on {triplet.subject}")

    section_rank = {"overall": 0, "objects": 1, "relationships": 2}
    violations.sort(key=lambda v: (section_rank[v.section], v.index))
    return ValidationReport(violations)
