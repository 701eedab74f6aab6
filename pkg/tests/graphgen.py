"""Seeded random generator for valid caption graphs.

Fields stay inside the serializer's constraints: no reserved characters,
no surrounding whitespace, canonical subtitles, mentions only of
existing objects, box coordinates on the 1e-4 grid so the 4-digit JSON
encoding is lossless.
"""

from __future__ import annotations

import random
from dataclasses import replace

import numpy as np

from bacon.geometry import Box, MaskRLE
from bacon.model import CaptionGraph, ObjectEntry, OverallSection, RelationTriplet

CATEGORIES = ["dog", "cat", "person", "tree", "car", "bench", "kite", "bird", "house", "boat"]
COLORS = ["red", "blue", "green", "brown", "golden", "white", "black", "gray"]
DESC_WORDS = ["small", "large", "fluffy", "old", "young", "bright", "quiet", "tall", "short", "calm"]
PREDICATES = ["sits on", "stands near", "holds", "chases", "looks at", "rests beside", "runs past", "leans on"]
SUBTITLES = ["Theme", "Style", "Background", "Foreground"]


def random_box(rng: random.Random) -> Box:
    x1, x2 = sorted(rng.sample(range(0, 10001), 2))
    y1, y2 = sorted(rng.sample(range(0, 10001), 2))
    return Box(x1 / 10000, y1 / 10000, x2 / 10000, y2 / 10000)


def random_mask(rng: random.Random, width: int | None = None, height: int | None = None) -> MaskRLE:
    width = width or rng.randint(1, 6)
    height = height or rng.randint(1, 6)
    bits = np.array(
        [[rng.random() < 0.5 for _ in range(width)] for _ in range(height)], dtype=bool
    )
    return MaskRLE.from_array(bits)


def random_graph(
    rng: random.Random,
    max_objects: int = 5,
    with_geometry: bool = False,
    mask_size: tuple[int, int] | None = None,
) -> CaptionGraph:
    n_obj = rng.randint(1, max_objects)
    cats = [rng.choice(CATEGORIES) for _ in range(n_obj)]
    totals: dict[str, int] = {}
    for cat in cats:
        totals[cat] = totals.get(cat, 0) + 1

    objects: list[ObjectEntry] = []
    counters: dict[str, int] = {}
    for cat in cats:
        counters[cat] = counters.get(cat, 0) + 1
        if totals[cat] == 1 and rng.random() < 0.5:
            name = cat
        else:
            name = f"{cat} {counters[cat]}"
        description = " ".join(
            rng.sample(DESC_WORDS, rng.randint(2, 4)) + [cat]
        )
        box = random_box(rng) if with_geometry and rng.random() < 0.8 else None
        mask = None
        if with_geometry and rng.random() < 0.5:
            mask = random_mask(rng, *(mask_size or (None, None)))
        objects.append(
            ObjectEntry(name, cat, description, rng.choice(COLORS), box=box, mask=mask)
        )

    overall: list[OverallSection] = []
    for _ in range(rng.randint(1, 3)):
        sentences = []
        for _ in range(rng.randint(1, 3)):
            if rng.random() < 0.5:
                target = rng.choice(objects)
                sentences.append(
                    f"A {rng.choice(DESC_WORDS)} scene with <{target.name}> nearby."
                )
            else:
                sentences.append(f"The {rng.choice(DESC_WORDS)} light fills the air.")
        overall.append(OverallSection(rng.choice(SUBTITLES), " ".join(sentences)))

    relationships: list[RelationTriplet] = []
    if len(objects) >= 2:
        for _ in range(rng.randint(0, 3)):
            a, b = rng.sample(objects, 2)
            relationships.append(RelationTriplet(a.name, rng.choice(PREDICATES), b.name))

    return CaptionGraph(overall=overall, objects=objects, relationships=relationships)


def strip_geometry(graph: CaptionGraph) -> CaptionGraph:
    """Drop boxes and masks (the string format does not carry them)."""
    return CaptionGraph(
        overall=list(graph.overall),
        objects=[replace(o, box=None, mask=None) for o in graph.objects],
        relationships=list(graph.relationships),
    )
