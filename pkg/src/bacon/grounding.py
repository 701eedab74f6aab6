"""Three-stage grounding: propose candidate regions by object name,
drop candidates the judge rejects, then select among the survivors by
description-crop similarity subject to an admissibility threshold.

Same-category instances can be assigned jointly so no two of them end
up on the same box.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import BackendUnavailableError
from .geometry import Box, greedy_match
from .model import CaptionGraph, ObjectEntry, category_head
from .providers import ProviderSet

DEFAULT_TAU_CROP = 0.25
DEFAULT_MAX_CANDIDATES = 10


@dataclass(frozen=True)
class GroundingConfig:
    crop_sim_threshold: float = DEFAULT_TAU_CROP
    max_candidates: int = DEFAULT_MAX_CANDIDATES
    assign_same_category: bool = True

    def __post_init__(self):
        if not 0.0 <= self.crop_sim_threshold <= 1.0:
            raise ValueError(f"crop threshold {self.crop_sim_threshold} outside [0,1]")
        if self.max_candidates < 1:
            raise ValueError("max_candidates must be >= 1")


@dataclass
class CandidateRecord:
    """Per-candidate trace through the pipeline stages."""

    box: Box
    detector_confidence: float
    judged_keep: bool | None = None
    judge_score: float | None = None
    crop_score: float | None = None
    selected: bool = False

    def to_jsonable(self) -> dict:
        return {
            "box": self.box.as_list(),
            "detector_confidence": self.detector_confidence,
            "judged_keep": self.judged_keep,
            "judge_score": self.judge_score,
            "crop_score": self.crop_score,
            "selected": self.selected,
        }


@dataclass
class GroundingOutcome:
    name: str
    box: Box | None
    stage_log: list[CandidateRecord] = field(default_factory=list)
    error: str | None = None

    def to_jsonable(self) -> dict:
        return {
            "name": self.name,
            "box": self.box.as_list() if self.box else None,
            "error": self.error,
            "candidates": [r.to_jsonable() for r in self.stage_log],
        }


def proposer_query(entry: ObjectEntry) -> str:
    """Detector query for an object: the name with its trailing instance
    index stripped ('person 2' -> 'person')."""
    return category_head(entry.name)


def _judged_candidates(
    entry: ObjectEntry, image, providers: ProviderSet, cfg: GroundingConfig
) -> list[CandidateRecord]:
    proposals = providers.region_proposer.propose_regions(image, proposer_query(entry))
    records = [
        CandidateRecord(p.box, p.detector_confidence)
        for p in proposals[: cfg.max_candidates]
    ]
    for record in records:
        keep, score = providers.region_judge.judge_region(image, record.box, entry.name)
        record.judged_keep = keep
        record.judge_score = score
        if keep:
            record.crop_score = providers.crop_embedder.score_crop(
                image, record.box, entry.description
            )
    return records


def ground_object(
    entry: ObjectEntry, image, providers: ProviderSet, cfg: GroundingConfig = GroundingConfig()
) -> GroundingOutcome:
    """Ground a single object. Among judged survivors with crop score
    >= threshold, the argmax crop score wins; ties go to the larger box
    area, then the lower candidate index. No admissible survivor means
    no box."""
    records = _judged_candidates(entry, image, providers, cfg)
    best_idx = None
    best_key = None
    for idx, record in enumerate(records):
        if not record.judged_keep:
            continue
        if record.crop_score < cfg.crop_sim_threshold:
            continue
        key = (record.crop_score, record.box.area, -idx)
        if best_key is None or key > best_key:
            best_key = key
            best_idx = idx
    if best_idx is not None:
        records[best_idx].selected = True
        return GroundingOutcome(entry.name, records[best_idx].box, records)
    return GroundingOutcome(entry.name, None, records)


def _assign_group(
    entries: list[ObjectEntry], image, providers: ProviderSet, cfg: GroundingConfig
) -> dict[str, GroundingOutcome]:
    """One-to-one assignment of same-category instances to candidates,
    greedy over admissible (instance, candidate) crop-score pairs."""
    logs = {entry.name: _judged_candidates(entry, image, providers, cfg) for entry in entries}

    def admissible(cand, inst):
        records = logs[inst[1].name]
        if cand[0] >= len(records):
            return False
        record = records[cand[0]]
        return bool(record.judged_keep) and record.crop_score >= cfg.crop_sim_threshold

    def score(cand, inst):
        return logs[inst[1].name][cand[0]].crop_score

    n_candidates = max(len(rec) for rec in logs.values()) if logs else 0
    result = greedy_match(
        list(enumerate(range(n_candidates))),
        list(enumerate(entries)),
        score,
        admissible,
    )

    outcomes = {}
    chosen = {inst_gi: cand_pi for cand_pi, inst_gi in
              ((p.pred_index, p.gt_index) for p in result.pairs)}
    for gi, entry in enumerate(entries):
        records = logs[entry.name]
        if gi in chosen:
            idx = chosen[gi]
            records[idx].selected = True
            outcomes[entry.name] = GroundingOutcome(entry.name, records[idx].box, records)
        else:
            outcomes[entry.name] = GroundingOutcome(entry.name, None, records)
    return outcomes


def ground_graph_traced(
    graph: CaptionGraph, image, providers: ProviderSet, cfg: GroundingConfig = GroundingConfig()
) -> tuple[CaptionGraph, dict[str, GroundingOutcome]]:
    """Ground every object; returns the boxed graph plus per-object
    outcomes. Provider failures are contained per object group (failed
    objects keep box=None and carry an error note)."""
    outcomes: dict[str, GroundingOutcome] = {}

    groups: dict[str, list[ObjectEntry]] = {}
    for entry in graph.objects:
        groups.setdefault(proposer_query(entry), []).append(entry)

    for entries in groups.values():
        try:
            if len(entries) > 1 and cfg.assign_same_category:
                outcomes.update(_assign_group(entries, image, providers, cfg))
            else:
                for entry in entries:
                    try:
                        outcomes[entry.name] = ground_object(entry, image, providers, cfg)
                    except BackendUnavailableError as exc:
                        outcomes[entry.name] = GroundingOutcome(
                            entry.name, None, [], error=str(exc)
                        )
        except BackendUnavailableError as exc:
            for entry in entries:
                outcomes[entry.name] = GroundingOutcome(entry.name, None, [], error=str(exc))

    boxed = [replace(o, box=outcomes[o.name].box) for o in graph.objects]
    grounded = CaptionGraph(
        overall=list(graph.overall), objects=boxed, relationships=list(graph.relationships)
    )
    return grounded, outcomes


def ground_graph(
    graph: CaptionGraph, image, providers: ProviderSet, cfg: GroundingConfig = GroundingConfig()
) -> CaptionGraph:
    grounded, _ = ground_graph_traced(graph, image, providers, cfg)
    return grounded
