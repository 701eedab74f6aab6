#!/usr/bin/env python3
"""Regenerate the bundled mini-corpus assets.

Emits, deterministically (fixed seed):
  src/bacon/assets/mini_corpus.jsonl   10 caption records with geometry
  src/bacon/assets/mini_fixtures.json  stub-provider fixtures covering
                                       grounding and QA over the corpus
  src/bacon/assets/mini_frames.jsonl   3 tracked frames for the diff demo

The fixtures give every object's true box the best crop score, so
grounding recovers the corpus geometry and same-category assignment has
an unambiguous optimum.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from graphgen import random_box, random_mask  # noqa: E402

from bacon.datasetio import DatasetRecord, write_jsonl  # noqa: E402
from bacon.format import serialize, to_json  # noqa: E402
from bacon.geometry import Box  # noqa: E402
from bacon.model import (  # noqa: E402
    CaptionGraph,
    ObjectEntry,
    OverallSection,
    RelationTriplet,
    category_head,
)

ASSETS = Path(__file__).resolve().parent.parent / "src" / "bacon" / "assets"

CATEGORIES = ["dog", "cat", "person", "tree", "car", "bench", "kite", "bird"]
COLORS = ["red", "blue", "green", "brown", "golden", "white"]
DESC_WORDS = ["small", "large", "fluffy", "old", "young", "bright", "quiet", "tall"]
PREDICATES = ["sits on", "stands near", "holds", "chases", "looks at", "rests beside"]
SUBTITLES = ["Theme", "Background", "Foreground"]


def shifted_decoy(rng: random.Random) -> Box:
    x1, x2 = sorted(rng.sample(range(0, 9001), 2))
    y1, y2 = sorted(rng.sample(range(0, 9001), 2))
    return Box(x1 / 10000, y1 / 10000, (x2 + 1000) / 10000, (y2 + 1000) / 10000)


def build_corpus(rng: random.Random) -> list[DatasetRecord]:
    records = []
    for i in range(10):
        n_obj = rng.randint(1, 4)
        cats = [rng.choice(CATEGORIES) for _ in range(n_obj)]
        counters: dict[str, int] = {}
        objects = []
        for cat in cats:
            counters[cat] = counters.get(cat, 0) + 1
            name = f"{cat} {counters[cat]}"
            description = " ".join(rng.sample(DESC_WORDS, 2) + [cat])
            objects.append(
                ObjectEntry(
                    name,
                    cat,
                    description,
                    rng.choice(COLORS),
                    box=random_box(rng),
                    mask=random_mask(rng, 8, 8),
                )
            )
        overall = [
            OverallSection("Theme", f"A {rng.choice(DESC_WORDS)} outdoor moment."),
            OverallSection(
                "Foreground",
                f"The scene centers on <{objects[0].name}> in clear view.",
            ),
        ]
        relationships = []
        if len(objects) >= 2:
            for _ in range(rng.randint(1, 2)):
                a, b = rng.sample(objects, 2)
                relationships.append(
                    RelationTriplet(a.name, rng.choice(PREDICATES), b.name)
                )
        graph = CaptionGraph(overall=overall, objects=objects, relationships=relationships)
        records.append(DatasetRecord(f"img{i}", graph, image_ref=None))
    return records


def build_fixtures(records: list[DatasetRecord], rng: random.Random) -> dict:
    propose = []
    judge = []
    score_crop = []
    qa = []
    for record in records:
        graph = record.caption
        groups: dict[str, list[ObjectEntry]] = {}
        for entry in graph.objects:
            groups.setdefault(category_head(entry.name), []).append(entry)
        for query, entries in groups.items():
            candidates = [e.box for e in entries] + [shifted_decoy(rng)]
            propose.append(
                {
                    "image_id": record.image_id,
                    "query": query,
                    "regions": [
                        {"box": box.as_list(), "confidence": round(0.95 - 0.1 * k, 4)}
                        for k, box in enumerate(candidates)
                    ],
                }
            )
            for entry in entries:
                for k, box in enumerate(candidates):
                    is_decoy = k == len(candidates) - 1
                    judge.append(
                        {
                            "image_id": record.image_id,
                            "box": box.as_list(),
                            "name": entry.name,
                            "keep": not is_decoy,
                            "score": 0.2 if is_decoy else 0.9,
                        }
                    )
                    if not is_decoy:
                        own = box == entry.box
                        score_crop.append(
                            {
                                "image_id": record.image_id,
                                "box": box.as_list(),
                                "text": entry.description,
                                "score": 0.9 if own else 0.3,
                            }
                        )
        caption_text = serialize(graph)
        first = graph.objects[0]
        qa.append(
            {
                "context": caption_text,
                "question": "What category is the first object?",
                "answer": first.category,
            }
        )
        qa.append(
            {
                "context": caption_text,
                "question": "What color is the first object?",
                "answer": first.color,
            }
        )
    return {"propose": propose, "judge": judge, "score_crop": score_crop, "qa": qa}


def build_frames(records: list[DatasetRecord]) -> list[dict]:
    base = records[0].caption
    frames = []
    for idx in range(3):
        objects = list(base.objects)
        overall = list(base.overall)
        if idx == 2 and objects:
            # nudge one description so the diff shows an alteration; the
            # appended words must not share hash buckets with the base
            # tokens or the similarity stays above the stability cutoff
            from dataclasses import replace

            from bacon.providers import StubTextEmbedder, cosine

            nudged = objects[0].description + " parked quietly"
            embedder = StubTextEmbedder()
            va, vb = embedder.embed([objects[0].description, nudged])
            assert cosine(va, vb) < 0.8, "frame nudge is not a visible alteration"
            objects[0] = replace(objects[0], description=nudged)
            overall = overall + [OverallSection("Background", "Clouds gather slowly.")]
        graph = CaptionGraph(
            overall=overall, objects=objects, relationships=list(base.relationships)
        )
        frames.append(
            {"frame_index": idx, "caption": json.loads(to_json(graph)), "track_ids": {}}
        )
    return frames


def main():
    rng = random.Random(20240817)
    ASSETS.mkdir(parents=True, exist_ok=True)
    records = build_corpus(rng)
    write_jsonl(records, ASSETS / "mini_corpus.jsonl")
    fixtures = build_fixtures(records, rng)
    (ASSETS / "mini_fixtures.json").write_text(
        json.dumps(fixtures, indent=1, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    frames = build_frames(records)
    with open(ASSETS / "mini_frames.jsonl", "w", encoding="utf-8") as fh:
        for frame in frames:
            fh.write(json.dumps(frame, ensure_ascii=False) + "\n")
    print(f"wrote {len(records)} records, {len(fixtures['qa'])} qa fixtures, {len(frames)} frames")


if __name__ == "__main__":
    main()
