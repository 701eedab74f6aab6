#!/usr/bin/env python3
"""End-to-end tour over the bundled mini-corpus, offline.

Parses a caption, grounds its objects with the stub providers, asks a
region question, scores answer consistency, and diffs the demo frames.
Run: python scripts/demo_pipeline.py
"""

from __future__ import annotations

import json
from importlib import resources

from bacon.consistency import AnswerSet, ConsistencyConfig, set_score
from bacon.datasetio import corpus_stats, load_jsonl
from bacon.format import serialize
from bacon.grounding import ground_graph
from bacon.model import validate
from bacon.providers import ProviderSet
from bacon.regionqa import RegionQuery, region_description
from bacon.videodiff import TrackedFrame, diff_captions, merge_track_ids
from bacon.format import from_json

ASSETS = resources.files("bacon.assets")


def main():
    records = list(load_jsonl(str(ASSETS / "mini_corpus.jsonl")))
    providers = ProviderSet.stub(str(ASSETS / "mini_fixtures.json"))

    record = records[0]
    print("=== caption (string format) ===")
    print(serialize(record.caption))
    print()

    report = validate(record.caption)
    print(f"validation: {'clean' if report.ok else 'violations found'}")

    grounded = ground_graph(record.caption, record.image_id, providers)
    boxed = sum(1 for o in grounded.objects if o.box is not None)
    print(f"grounding: {boxed}/{len(grounded.objects)} objects boxed")

    target = grounded.objects[0].box
    description = region_description(grounded, RegionQuery(target, 0.3))
    print(f"region description at {target.as_list()}: {description!r}")

    answers = AnswerSet(["A red car. A tall tree.", "A red car."])
    score = set_score(answers, providers.text_embedder, ConsistencyConfig(rho=0.8))
    print(f"consistency of demo answers: {score:.4f}")

    frames = []
    with open(str(ASSETS / "mini_frames.jsonl"), encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            frames.append(
                TrackedFrame(row["frame_index"], from_json(json.dumps(row["caption"])), {})
            )
    merged = merge_track_ids(frames, 0.8)
    diff = diff_captions(merged[-2], merged[-1], providers.text_embedder)
    counts = {}
    for item in diff.all_items():
        counts[item.status.value] = counts.get(item.status.value, 0) + 1
    print(f"frame diff statuses: {counts}")

    stats = corpus_stats(records, top_n=3)
    print(f"corpus: {stats.images} images, top categories {stats.categories}")


if __name__ == "__main__":
    main()
