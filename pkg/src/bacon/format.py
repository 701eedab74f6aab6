"""Bit-exact parser and serializer for the caption string format, the
lossless JSON representation, and the instruction-prompt assembler.

String grammar (normal form):
  - three section headers ``%%<Title>%%`` alone on their own lines, in
    config order; a single blank line is tolerated between sections
  - overall blocks: ``&&<Subtitle>&& free text``; object mentions inside
    the text are written ``<name>``
  - object lines: ``<name>(category: C; description: D; color: K)``
  - relation lines: ``<subject> [predicate] <object>``
Reserved characters ``% & < > ( ) [ ] ;`` may not appear in free text
(angle brackets are permitted in overall text only as balanced mention
markers). There is no escaping mechanism: the serializer errors instead
of rewriting.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources

from .errors import (
    ParseError,
    ParseErrorKind,
    ReservedCharError,
    SchemaError,
    UnbalancedMarkerError,
    UnknownSlotError,
)
from .geometry import Box, MaskRLE
from .model import (
    CaptionGraph,
    ObjectEntry,
    OverallSection,
    RelationTriplet,
    mentioned_objects,
)

GRAMMAR_ASSET_VERSION = "1.0"

RESERVED_CHARS = "%&<>()[];"

DEFAULT_MAIN_TITLES = ("Overall Description", "Object List", "Relationships")
DEFAULT_SUBTITLES = ("Theme", "Style", "Background", "Foreground")

_HEADER_RE = re.compile(r"^%%(.*)%%$")
_SUBTITLE_RE = re.compile(r"^&&(.*?)&&(.*)$")
_OBJECT_RE = re.compile(r"^<([^<>]*)>\((.*)\)$")
_RELATION_RE = re.compile(r"^<([^<>]*)>\s+\[([^\[\]]*)\]\s+<([^<>]*)>$")

_DETAIL_KEYS = ("category", "description", "color")


@dataclass(frozen=True)
class GrammarConfig:
    main_titles: tuple[str, str, str] = DEFAULT_MAIN_TITLES
    canonical_subtitles: tuple[str, ...] = DEFAULT_SUBTITLES
    strict: bool = True

    def __post_init__(self):
        if len(self.main_titles) != 3 or len(set(self.main_titles)) != 3:
            raise ValueError("main_titles must be 3 distinct titles")
        if not self.canonical_subtitles:
            raise ValueError("canonical_subtitles must be non-empty")


DEFAULT_GRAMMAR = GrammarConfig()


def _check_reserved(text: str, line_no: int, allow_mentions: bool):
    """Raise ParseError for reserved characters in free text; balanced
    mention markers are allowed only where mentions are legal."""
    forbidden = "%&()[];" if allow_mentions else RESERVED_CHARS
    for ch in text:
        if ch in forbidden:
            raise ParseError(
                ParseErrorKind.RESERVED_CHAR_IN_TEXT,
                line_no,
                f"reserved character {ch!r} in free text",
            )
    if allow_mentions:
        try:
            mentioned_objects(text)
        except UnbalancedMarkerError as exc:
            raise ParseError(ParseErrorKind.UNBALANCED_MARKER, line_no, str(exc)) from None


def parse(text: str, cfg: GrammarConfig = DEFAULT_GRAMMAR) -> CaptionGraph:
    """Parse the string format into a caption graph.

    Fail-fast: the first grammar violation raises ParseError with its
    1-based line number. The graph is not validated beyond the grammar
    (run :func:`bacon.model.validate` for referential checks).
    """
    lines = [ln.rstrip() for ln in text.split("\n")]
    n = len(lines)

    def clamp(i: int) -> int:
        return max(1, min(i + 1, max(1, n)))

    bodies: list[tuple[int, int]] = []
    pos = 0
    for si, title in enumerate(cfg.main_titles):
        while pos < n and lines[pos] == "":
            pos += 1
        if pos >= n:
            raise ParseError(
                ParseErrorKind.MISSING_SECTION,
                clamp(n - 1),
                f"missing section header %%{title}%%",
            )
        m = _HEADER_RE.match(lines[pos])
        if m is None or m.group(1) != title:
            raise ParseError(
                ParseErrorKind.MISSING_SECTION,
                clamp(pos),
                f"expected header %%{title}%%",
            )
        pos += 1
        start = pos
        if si < 2:
            while pos < n and _HEADER_RE.match(lines[pos]) is None:
                pos += 1
        else:
            pos = n
        bodies.append((start, pos))

    overall = _parse_overall(lines, bodies[0], cfg)
    objects = _parse_objects(lines, bodies[1])
    relationships = _parse_relationships(lines, bodies[2])
    return CaptionGraph(overall=overall, objects=objects, relationships=relationships)


def _parse_overall(
    lines: list[str], body: tuple[int, int], cfg: GrammarConfig
) -> list[OverallSection]:
    sections: list[OverallSection] = []
    for i in range(*body):
        line = lines[i]
        if line == "":
            continue
        m = _SUBTITLE_RE.match(line)
        if line.startswith("&&") and m is None:
            raise ParseError(
                ParseErrorKind.UNKNOWN_SUBTITLE, i + 1, "unterminated subtitle marker"
            )
        if m is not None:
            subtitle = m.group(1).strip()
            if not subtitle:
                raise ParseError(ParseErrorKind.UNKNOWN_SUBTITLE, i + 1, "empty subtitle")
            if cfg.strict and subtitle not in cfg.canonical_subtitles:
                raise ParseError(
                    ParseErrorKind.UNKNOWN_SUBTITLE,
                    i + 1,
                    f"subtitle {subtitle!r} not in canonical set",
                )
            text = m.group(2).strip()
            _check_reserved(text, i + 1, allow_mentions=True)
            sections.append(OverallSection(subtitle, text))
        else:
            if not sections:
                raise ParseError(
                    ParseErrorKind.UNKNOWN_SUBTITLE, i + 1, "text before any subtitle"
                )
            text = line.strip()
            _check_reserved(text, i + 1, allow_mentions=True)
            prev = sections[-1]
            joined = f"{prev.text} {text}".strip()
            sections[-1] = OverallSection(prev.subtitle, joined)
    return sections


def _parse_objects(lines: list[str], body: tuple[int, int]) -> list[ObjectEntry]:
    objects: list[ObjectEntry] = []
    seen: set[str] = set()
    for i in range(*body):
        line = lines[i]
        if line == "":
            continue
        m = _OBJECT_RE.match(line)
        if m is None:
            raise ParseError(
                ParseErrorKind.BAD_OBJECT_LINE,
                i + 1,
                "expected <name>(category: ...; description: ...; color: ...)",
            )
        name = m.group(1).strip()
        if not name:
            raise ParseError(ParseErrorKind.BAD_OBJECT_LINE, i + 1, "empty object name")
        _check_reserved(name, i + 1, allow_mentions=False)
        if name in seen:
            raise ParseError(
                ParseErrorKind.DUPLICATE_NAME, i + 1, f"duplicate object name {name}"
            )
        seen.add(name)

        parts = m.group(2).split(";")
        if len(parts) != 3:
            raise ParseError(
                ParseErrorKind.BAD_OBJECT_LINE,
                i + 1,
                f"expected 3 detail fields, got {len(parts)}",
            )
        values: list[str] = []
        for key, part in zip(_DETAIL_KEYS, parts):
            label, colon, value = part.partition(":")
            if not colon or label.strip() != key:
                raise ParseError(
                    ParseErrorKind.BAD_OBJECT_LINE,
                    i + 1,
                    f"expected detail field {key!r}, got {part.strip()!r}",
                )
            value = value.strip()
            _check_reserved(value, i + 1, allow_mentions=False)
            values.append(value)
        objects.append(ObjectEntry(name, values[0], values[1], values[2]))
    return objects


def _parse_relationships(
    lines: list[str], body: tuple[int, int]
) -> list[RelationTriplet]:
    relationships: list[RelationTriplet] = []
    for i in range(*body):
        line = lines[i]
        if line == "":
            continue
        m = _RELATION_RE.match(line)
        if m is None:
            raise ParseError(
                ParseErrorKind.BAD_RELATION_LINE,
                i + 1,
                "expected <subject> [predicate] <object>",
            )
        subject = m.group(1).strip()
        predicate = m.group(2).strip()
        obj = m.group(3).strip()
        if not subject or not obj:
            raise ParseError(ParseErrorKind.BAD_RELATION_LINE, i + 1, "empty endpoint name")
        if not predicate:
            raise ParseError(ParseErrorKind.BAD_RELATION_LINE, i + 1, "empty predicate")
        for token in (subject, predicate, obj):
            _check_reserved(token, i + 1, allow_mentions=False)
        relationships.append(RelationTriplet(subject, predicate, obj))
    return relationships


def _guard_field(field_name: str, value: str, allow_mentions: bool = False):
    if value != value.strip():
        raise ValueError(f"{field_name} has surrounding whitespace: {value!r}")
    if "\n" in value or "\r" in value:
        raise ReservedCharError(field_name, "\\n")
    forbidden = "%&()[];" if allow_mentions else RESERVED_CHARS
    for ch in value:
        if ch in forbidden:
            raise ReservedCharError(field_name, ch)
    if allow_mentions:
        mentioned_objects(value)  # raises UnbalancedMarkerError


def serialize(graph: CaptionGraph, cfg: GrammarConfig = DEFAULT_GRAMMAR) -> str:
    """Emit the deterministic normal form: one line per element, no
    blank lines, LF separators, no trailing newline."""
    out: list[str] = [f"%%{cfg.main_titles[0]}%%"]
    for section in graph.overall:
        if not section.subtitle:
            raise ValueError("empty subtitle")
        _guard_field("subtitle", section.subtitle)
        _guard_field("overall text", section.text, allow_mentions=True)
        out.append(f"&&{section.subtitle}&& {section.text}".rstrip())
    out.append(f"%%{cfg.main_titles[1]}%%")
    for entry in graph.objects:
        if not entry.name:
            raise ValueError("empty object name")
        _guard_field("object name", entry.name)
        _guard_field("category", entry.category)
        _guard_field("description", entry.description)
        _guard_field("color", entry.color)
        out.append(
            f"<{entry.name}>(category: {entry.category};"
            f" description: {entry.description}; color: {entry.color})"
        )
    out.append(f"%%{cfg.main_titles[2]}%%")
    for triplet in graph.relationships:
        if not triplet.predicate:
            raise ValueError("empty predicate")
        _guard_field("subject", triplet.subject)
        _guard_field("predicate", triplet.predicate)
        _guard_field("object", triplet.object)
        out.append(f"<{triplet.subject}> [{triplet.predicate}] <{triplet.object}>")
    return "\n".join(out)


def _jstr(value: str) -> str:
    return json.dumps(value, ensure_ascii=False)


def _jbox(box: Box | None) -> str:
    if box is None:
        return "null"
    return "[" + ",".join(f"{c:.4f}" for c in box.as_list()) + "]"


def to_json(graph: CaptionGraph) -> str:
    """Lossless single-line JSON with fixed key order; box coordinates
    carry exactly 4 fractional digits."""
    overall = ",".join(
        f'{{"subtitle":{_jstr(s.subtitle)},"text":{_jstr(s.text)}}}'
        for s in graph.overall
    )
    objects = ",".join(
        f'{{"name":{_jstr(o.name)},"category":{_jstr(o.category)},'
        f'"description":{_jstr(o.description)},"color":{_jstr(o.color)},'
        f'"box":{_jbox(o.box)},'
        f'"mask":{_jstr(o.mask.to_text()) if o.mask is not None else "null"}}}'
        for o in graph.objects
    )
    relationships = ",".join(
        f'{{"subject":{_jstr(t.subject)},"predicate":{_jstr(t.predicate)},'
        f'"object":{_jstr(t.object)}}}'
        for t in graph.relationships
    )
    return (
        f'{{"overall":[{overall}],"objects":[{objects}],'
        f'"relationships":[{relationships}]}}'
    )


def _expect_keys(obj: dict, keys: tuple[str, ...], path: str):
    if not isinstance(obj, dict):
        raise SchemaError(path, f"expected object, got {type(obj).__name__}")
    for key in keys:
        if key not in obj:
            raise SchemaError(f"{path}/{key}", "missing key")
    for key in obj:
        if key not in keys:
            raise SchemaError(f"{path}/{key}", "unexpected key")


def _expect_str(value, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(path, f"expected string, got {type(value).__name__}")
    return value


def _parse_box(value, path: str) -> Box | None:
    if value is None:
        return None
    if not isinstance(value, list) or len(value) != 4:
        raise SchemaError(path, "box must be a list of 4 numbers")
    coords = []
    for c in value:
        if not isinstance(c, (int, float)) or isinstance(c, bool):
            raise SchemaError(path, "box coordinates must be numbers")
        coords.append(float(c))
    try:
        return Box.from_list(coords)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None


def _parse_mask(value, path: str) -> MaskRLE | None:
    if value is None:
        return None
    if not isinstance(value, str):
        raise SchemaError(path, "mask must be a string")
    try:
        return MaskRLE.from_text(value)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None


def from_json(text: str) -> CaptionGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("/", f"invalid JSON: {exc}") from None
    _expect_keys(data, ("overall", "objects", "relationships"), "")

    if not isinstance(data["overall"], list):
        raise SchemaError("/overall", "expected list")
    overall = []
    for i, item in enumerate(data["overall"]):
        path = f"/overall/{i}"
        _expect_keys(item, ("subtitle", "text"), path)
        overall.append(
            OverallSection(
                _expect_str(item["subtitle"], f"{path}/subtitle"),
                _expect_str(item["text"], f"{path}/text"),
            )
        )

    if not isinstance(data["objects"], list):
        raise SchemaError("/objects", "expected list")
    objects = []
    for i, item in enumerate(data["objects"]):
        path = f"/objects/{i}"
        _expect_keys(item, ("name", "category", "description", "color", "box", "mask"), path)
        objects.append(
            ObjectEntry(
                name=_expect_str(item["name"], f"{path}/name"),
                category=_expect_str(item["category"], f"{path}/category"),
                description=_expect_str(item["description"], f"{path}/description"),
                color=_expect_str(item["color"], f"{path}/color"),
                box=_parse_box(item["box"], f"{path}/box"),
                mask=_parse_mask(item["mask"], f"{path}/mask"),
            )
        )

    if not isinstance(data["relationships"], list):
        raise SchemaError("/relationships", "expected list")
    relationships = []
    for i, item in enumerate(data["relationships"]):
        path = f"/relationships/{i}"
        _expect_keys(item, ("subject", "predicate", "object"), path)
        relationships.append(
            RelationTriplet(
                _expect_str(item["subject"], f"{path}/subject"),
                _expect_str(item["predicate"], f"{path}/predicate"),
                _expect_str(item["object"], f"{path}/object"),
            )
        )
    return CaptionGraph(overall=overall, objects=objects, relationships=relationships)


def _default_slots(cfg: GrammarConfig) -> dict[str, str]:
    t_overall, t_objects, t_relations = cfg.main_titles
    full_example = "\n".join(
        [
            f"%%{t_overall}%%",
            "&&Theme&& A quiet morning walk in the park.",
            "&&Background&& The sky is clear and pale blue.",
            "&&Foreground&& A <person 1> walks a <dog 1> along a gravel path.",
            f"%%{t_objects}%%",
            "<person 1>(category: person; description: a woman in a green coat;"
            " color: green)",
            "<dog 1>(category: dog; description: a small terrier on a leash;"
            " color: brown)",
            f"%%{t_relations}%%",
            "<person 1> [walks] <dog 1>",
        ]
    )
    return {
        "title_overall": t_overall,
        "title_objects": t_objects,
        "title_relationships": t_relations,
        "subtitles": ", ".join(cfg.canonical_subtitles),
        "object_format": "<name>(category: the category word; description:"
        " one short sentence; color: the dominant colors)",
        "numbering": "<person 1>(category: person; description: a man in a"
        " red jacket; color: red)\n<person 2>(category: person; description:"
        " a child holding a kite; color: yellow)",
        "relationship_format": "<subject name> [predicate] <object name>",
        "one_way": "write <person 1> [holds] <kite 1> and do not also write"
        " <kite 1> [is held by] <person 1>",
        "full_example": full_example,
    }


def load_instruction_template() -> str:
    return (
        resources.files("bacon.assets")
        .joinpath("instruction_template_v1.txt")
        .read_text(encoding="utf-8")
    )


def build_instruction_prompt(
    cfg: GrammarConfig = DEFAULT_GRAMMAR,
    examples: list[tuple[str, str]] | None = None,
) -> str:
    """Fill the instruction template with grammar symbols and example
    blocks; caller-provided (slot, text) pairs override the defaults."""
    slots = _default_slots(cfg)
    for slot, text in examples or []:
        if slot not in slots:
            raise UnknownSlotError(f"unknown template slot {slot!r}")
        slots[slot] = text
    template = load_instruction_template()
    prompt = re.sub(r"\{\{(\w+)\}\}", lambda m: slots[m.group(1)], template)
    return prompt
