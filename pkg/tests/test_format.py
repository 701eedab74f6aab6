import json
import random
from pathlib import Path

import pytest

from bacon.errors import (
    ParseError,
    ParseErrorKind,
    ReservedCharError,
    SchemaError,
    UnknownSlotError,
)
from bacon.format import (
    DEFAULT_GRAMMAR,
    GRAMMAR_ASSET_VERSION,
    GrammarConfig,
    build_instruction_prompt,
    from_json,
    parse,
    serialize,
    to_json,
)
from bacon.geometry import Box, MaskRLE
from bacon.model import CaptionGraph, ObjectEntry, OverallSection, RelationTriplet, validate
from graphgen import random_graph, strip_geometry

DATA = Path(__file__).parent / "data"

SIX_LINE_EXAMPLE = (
    "%%Overall Description%%\n"
    "&&Background&& A sunny park.\n"
    "%%Object List%%\n"
    "<dog 1>(category: dog; description: a small brown dog; color: brown)\n"
    "%%Relationships%%\n"
    "<dog 1> [runs in] <park 1>"
)


class TestParse:
    def test_six_line_example(self):
        graph = parse(SIX_LINE_EXAMPLE)
        assert graph.overall == [OverallSection("Background", "A sunny park.")]
        assert graph.objects == [
            ObjectEntry("dog 1", "dog", "a small brown dog", "brown")
        ]
        assert graph.relationships == [RelationTriplet("dog 1", "runs in", "park 1")]
        report = validate(graph)
        assert any("unknown endpoint park 1" in v.message for v in report.violations)

    def test_blank_line_between_sections_tolerated(self):
        text = SIX_LINE_EXAMPLE.replace(
            "%%Object List%%", "\n%%Object List%%"
        ).replace("%%Relationships%%", "\n%%Relationships%%")
        assert parse(text) == parse(SIX_LINE_EXAMPLE)

    def test_trailing_whitespace_trimmed(self):
        text = SIX_LINE_EXAMPLE.replace("A sunny park.", "A sunny park.   ")
        assert parse(text) == parse(SIX_LINE_EXAMPLE)
        assert serialize(parse(text)) == SIX_LINE_EXAMPLE

    def test_continuation_line_joins(self):
        text = SIX_LINE_EXAMPLE.replace(
            "&&Background&& A sunny park.",
            "&&Background&& A sunny park.\nBirds fly overhead.",
        )
        graph = parse(text)
        assert graph.overall[0].text == "A sunny park. Birds fly overhead."

    def test_lax_mode_accepts_unknown_subtitle(self):
        text = SIX_LINE_EXAMPLE.replace("&&Background&&", "&&Vibe&&")
        lax = GrammarConfig(strict=False)
        graph = parse(text, lax)
        assert graph.overall[0].subtitle == "Vibe"
        with pytest.raises(ParseError):
            parse(text)

    def test_colon_allowed_inside_detail_value(self):
        text = SIX_LINE_EXAMPLE.replace(
            "description: a small brown dog", "description: seen at 10:30 am"
        )
        assert parse(text).objects[0].description == "seen at 10:30 am"

    def test_custom_titles(self):
        cfg = GrammarConfig(main_titles=("Scene", "Things", "Links"))
        text = (
            "%%Scene%%\n&&Theme&& Calm.\n%%Things%%\n"
            "<dog 1>(category: dog; description: a dog; color: brown)\n%%Links%%"
        )
        graph = parse(text, cfg)
        assert graph.objects[0].name == "dog 1"
        assert serialize(graph, cfg) == text

    def test_malformed_golden_corpus(self):
        cases = json.loads((DATA / "malformed_corpus.json").read_text())
        assert len(cases) == 20
        for case in cases:
            with pytest.raises(ParseError) as excinfo:
                parse(case["input"])
            assert excinfo.value.kind.value == case["kind"], case["name"]
            assert excinfo.value.line == case["line"], case["name"]

    def test_fail_fast_is_deterministic(self):
        bad = "%%Overall Description%%\n&&Vibe&& x % y.\n%%Object List%%\n%%Relationships%%"
        kinds = set()
        for _ in range(3):
            with pytest.raises(ParseError) as excinfo:
                parse(bad)
            kinds.add((excinfo.value.kind, excinfo.value.line))
        assert len(kinds) == 1


class TestSerialize:
    def test_six_line_example_byte_exact(self):
        graph = CaptionGraph(
            overall=[OverallSection("Background", "A sunny park.")],
            objects=[ObjectEntry("dog 1", "dog", "a small brown dog", "brown")],
            relationships=[RelationTriplet("dog 1", "runs in", "park 1")],
        )
        assert serialize(graph) == SIX_LINE_EXAMPLE

    def test_reserved_char_rejected(self):
        graph = CaptionGraph(
            overall=[OverallSection("Background", "x")],
            objects=[ObjectEntry("dog 1", "dog", "a (small) dog", "brown")],
        )
        with pytest.raises(ReservedCharError):
            serialize(graph)

    def test_mentions_allowed_in_overall_text(self):
        graph = CaptionGraph(
            overall=[OverallSection("Foreground", "See <dog 1> run.")],
            objects=[ObjectEntry("dog 1", "dog", "a dog", "brown")],
        )
        text = serialize(graph)
        assert "<dog 1> run" in text
        assert parse(text) == graph

    def test_main_titles_once_in_order(self):
        rng = random.Random(1)
        graph = random_graph(rng)
        text = serialize(graph)
        positions = [text.index(f"%%{t}%%") for t in DEFAULT_GRAMMAR.main_titles]
        assert positions == sorted(positions)
        for title in DEFAULT_GRAMMAR.main_titles:
            assert text.count(f"%%{title}%%") == 1

    def test_round_trip_random_graphs(self):
        rng = random.Random(42)
        for _ in range(200):
            graph = random_graph(rng)
            assert parse(serialize(graph)) == graph


class TestJson:
    def test_box_four_fractional_digits(self):
        graph = CaptionGraph(
            overall=[OverallSection("Background", "x")],
            objects=[
                ObjectEntry(
                    "dog 1", "dog", "a dog", "brown", box=Box(0.1, 0.2, 0.5, 0.9)
                )
            ],
        )
        assert '"box":[0.1000,0.2000,0.5000,0.9000]' in to_json(graph)

    def test_key_order_fixed(self):
        graph = CaptionGraph(
            overall=[OverallSection("Background", "x")],
            objects=[ObjectEntry("dog 1", "dog", "a dog", "brown")],
            relationships=[RelationTriplet("dog 1", "near", "dog 1")],
        )
        text = to_json(graph)
        assert text.index('"overall"') < text.index('"objects"') < text.index(
            '"relationships"'
        )
        obj = text[text.index('"objects"') :]
        keys = ['"name"', '"category"', '"description"', '"color"', '"box"', '"mask"']
        assert [obj.index(k) for k in keys] == sorted(obj.index(k) for k in keys)

    def test_round_trip_with_geometry(self):
        rng = random.Random(43)
        for _ in range(200):
            graph = random_graph(rng, with_geometry=True)
            assert from_json(to_json(graph)) == graph

    def test_mask_round_trips_via_text_form(self):
        mask = MaskRLE(2, 2, (0, 1, 3))
        graph = CaptionGraph(
            overall=[OverallSection("Background", "x")],
            objects=[ObjectEntry("dog 1", "dog", "a dog", "brown", mask=mask)],
        )
        assert '"mask":"2x2:0,1,3"' in to_json(graph)
        assert from_json(to_json(graph)).objects[0].mask == mask

    def test_schema_error_path_for_bad_box(self):
        payload = {
            "overall": [],
            "objects": [
                {
                    "name": "dog 1",
                    "category": "dog",
                    "description": "a dog",
                    "color": "brown",
                    "box": [0.9, 0.2, 0.5, 0.9],
                    "mask": None,
                }
            ],
            "relationships": [],
        }
        with pytest.raises(SchemaError) as excinfo:
            from_json(json.dumps(payload))
        assert excinfo.value.path == "/objects/0/box"

    def test_schema_error_missing_key(self):
        with pytest.raises(SchemaError) as excinfo:
            from_json('{"overall":[],"objects":[]}')
        assert excinfo.value.path == "/relationships"

    def test_schema_error_unexpected_key(self):
        with pytest.raises(SchemaError) as excinfo:
            from_json('{"overall":[],"objects":[],"relationships":[],"extra":1}')
        assert excinfo.value.path == "/extra"

    def test_schema_error_bad_mask(self):
        payload = {
            "overall": [],
            "objects": [
                {
                    "name": "dog 1",
                    "category": "dog",
                    "description": "a dog",
                    "color": "brown",
                    "box": None,
                    "mask": "2x2:0,1",
                }
            ],
            "relationships": [],
        }
        with pytest.raises(SchemaError) as excinfo:
            from_json(json.dumps(payload))
        assert excinfo.value.path == "/objects/0/mask"

    def test_invalid_json_text(self):
        with pytest.raises(SchemaError):
            from_json("not json")


class TestInstructionPrompt:
    def test_contains_default_titles(self):
        prompt = build_instruction_prompt()
        assert "%%Overall Description%%" in prompt
        assert "%%Object List%%" in prompt
        assert "%%Relationships%%" in prompt
        assert "{{" not in prompt

    def test_numbering_slot_override(self):
        text = "<cup 1>(category: cup; description: small; color: white)"
        prompt = build_instruction_prompt(examples=[("numbering", text)])
        assert text in prompt

    def test_unknown_slot(self):
        with pytest.raises(UnknownSlotError):
            build_instruction_prompt(examples=[("nonexistent", "x")])

    def test_deterministic(self):
        assert build_instruction_prompt() == build_instruction_prompt()

    def test_custom_titles_substituted(self):
        cfg = GrammarConfig(main_titles=("Scene", "Things", "Links"))
        prompt = build_instruction_prompt(cfg)
        assert "%%Scene%%" in prompt and "%%Things%%" in prompt and "%%Links%%" in prompt

    def test_asset_version_exposed(self):
        assert GRAMMAR_ASSET_VERSION == "1.0"


class TestGrammarConfig:
    def test_requires_three_distinct_titles(self):
        with pytest.raises(ValueError):
            GrammarConfig(main_titles=("A", "A", "B"))
        with pytest.raises(ValueError):
            GrammarConfig(main_titles=("A", "B"))

    def test_requires_subtitles(self):
        with pytest.raises(ValueError):
            GrammarConfig(canonical_subtitles=())


def test_string_round_trip_excludes_geometry():
    rng = random.Random(44)
    graph = random_graph(rng, with_geometry=True)
    assert parse(serialize(graph)) == strip_geometry(graph)
