"""Toolkit for the BACON structured image-caption format.

A caption is three parts: an overall description, an object list, and
relationships between the named objects. The toolkit covers the
symbol-delimited string format and its JSON twin, the caption-graph
types and validation, the grounding-disambiguation pipeline, semantic
consistency scoring, and the evaluation harness (caption QA,
open-vocabulary detection, scene-graph recall, region QA, layout
metrics, video caption diffing). All model inference sits behind
pluggable providers; deterministic stubs keep everything runnable
offline.
"""

__version__ = "0.1.0"

from .consistency import AnswerSet, ConsistencyConfig, pair_score, set_score
from .format import (
    DEFAULT_GRAMMAR,
    GrammarConfig,
    build_instruction_prompt,
    from_json,
    parse,
    serialize,
    to_json,
)
from .geometry import Box, MaskRLE, centroid, greedy_match, iou_box, iou_mask, overlap_fraction
from .grounding import GroundingConfig, GroundingOutcome, ground_graph, ground_object
from .model import (
    CaptionGraph,
    ObjectEntry,
    OverallSection,
    RelationTriplet,
    canonical_numbering,
    dedupe_relationships,
    mentioned_objects,
    renumber_graph,
    strip_sentences_mentioning,
    validate,
)
from .providers import ProviderSet, StubTextEmbedder, cosine
from .videodiff import TrackedFrame, diff_captions, merge_track_ids

__all__ = [
    "AnswerSet",
    "Box",
    "CaptionGraph",
    "ConsistencyConfig",
    "DEFAULT_GRAMMAR",
    "GrammarConfig",
    "GroundingConfig",
    "GroundingOutcome",
    "MaskRLE",
    "ObjectEntry",
    "OverallSection",
    "ProviderSet",
    "RelationTriplet",
    "StubTextEmbedder",
    "TrackedFrame",
    "build_instruction_prompt",
    "canonical_numbering",
    "centroid",
    "cosine",
    "dedupe_relationships",
    "diff_captions",
    "from_json",
    "ground_graph",
    "ground_object",
    "greedy_match",
    "iou_box",
    "iou_mask",
    "mentioned_objects",
    "merge_track_ids",
    "overlap_fraction",
    "pair_score",
    "parse",
    "renumber_graph",
    "serialize",
    "set_score",
    "strip_sentences_mentioning",
    "to_json",
    "validate",
]
