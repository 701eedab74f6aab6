"""Region-based QA helpers built purely on the caption graph.

A target region is described by concatenating the descriptions of
objects whose boxes overlap it enough; the best candidate region for a
question is picked by weighting each object's description-question
similarity with how much of the object falls inside the candidate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

from .errors import NoGroundedObjectsError
from .geometry import Box, iou_box, overlap_fraction
from .model import CaptionGraph
from .providers import TextEmbedder, cosine

logger = logging.getLogger(__name__)

DEFAULT_IOU_MIN = 0.3


@dataclass(frozen=True)
class RegionQuery:
    target: Box
    iou_min: float = DEFAULT_IOU_MIN

    def __post_init__(self):
        if not 0.0 <= self.iou_min <= 1.0:
            raise ValueError(f"iou_min {self.iou_min} outside [0,1]")


@dataclass
class PointingCandidates:
    regions: list[Box]

    def __post_init__(self):
        if len(self.regions) < 2:
            raise ValueError("pointing needs at least 2 candidate regions")


def region_description(graph: CaptionGraph, q: RegionQuery) -> str:
    """Descriptions of objects with IoU(box, target) >= iou_min, ordered
    by IoU descending (ties keep object-list order), joined by single
    spaces. Boxless objects are skipped with a warning."""
    scored = []
    for idx, entry in enumerate(graph.objects):
        if entry.box is None:
            logger.warning("object %s has no box; skipped", entry.name)
            continue
        iou = iou_box(entry.box, q.target)
        if iou >= q.iou_min:
            scored.append((-iou, idx, entry.description))
    scored.sort()
    return " ".join(desc for _, _, desc in scored)


def region_scores(
    boxes: Sequence[Box], sigmas: Sequence[float], regions: Sequence[Box]
) -> list[float]:
    """Candidate-region scores: sum over objects of
    overlap_fraction(object, region) * object score."""
    return [
        sum(overlap_fraction(box, region) * sigma for box, sigma in zip(boxes, sigmas))
        for region in regions
    ]


def pointing_select(
    graph: CaptionGraph,
    question: str,
    cands: PointingCandidates,
    embedder: TextEmbedder,
) -> tuple[int, list[float]]:
    """Pick the candidate region whose contained objects best match the
    question; returns (argmax index, full score vector). Ties go to the
    lowest index."""
    grounded = [o for o in graph.objects if o.box is not None]
    if not grounded:
        raise NoGroundedObjectsError("no object carries a box")
    texts = [o.description for o in grounded] + [question]
    vectors = embedder.embed(texts)
    question_vec = vectors[-1]
    sigmas = [cosine(v, question_vec) for v in vectors[:-1]]
    scores = region_scores([o.box for o in grounded], sigmas, cands.regions)
    best = max(range(len(scores)), key=lambda i: (scores[i], -i))
    return best, scores
