"""Multi-frame caption alignment: unify object identities across frames
by mask overlap, then classify every caption element of a frame pair as
new, removed, altered, or persistent.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .geometry import iou_box, iou_mask
from .model import CaptionGraph, RelationTriplet, split_sentences
from .providers import TextEmbedder, cosine

DEFAULT_TAU_MASK = 0.8
DEFAULT_RHO_STABLE = 0.8


@dataclass
class TrackedFrame:
    frame_index: int
    graph: CaptionGraph
    track_ids: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        names = set(self.graph.object_names())
        unknown = set(self.track_ids) - names
        if unknown:
            raise ValueError(f"track ids for unknown objects: {sorted(unknown)}")


class DiffStatus(enum.Enum):
    NEW = "new"
    REMOVED = "removed"
    ALTERED = "altered"
    PERSISTENT = "persistent"


@dataclass(frozen=True)
class DiffItem:
    kind: str  # "object" | "relationship" | "overall"
    status: DiffStatus
    element: str
    previous: str | None = None
    current: str | None = None

    def to_jsonable(self) -> dict:
        return {
            "kind": self.kind,
            "status": self.status.value,
            "element": self.element,
            "previous": self.previous,
            "current": self.current,
        }


@dataclass
class DiffReport:
    objects: list[DiffItem] = field(default_factory=list)
    relationships: list[DiffItem] = field(default_factory=list)
    overall: list[DiffItem] = field(default_factory=list)

    def all_items(self) -> list[DiffItem]:
        return [*self.overall, *self.objects, *self.relationships]

    def to_jsonable(self) -> dict:
        return {
            "overall": [i.to_jsonable() for i in self.overall],
            "objects": [i.to_jsonable() for i in self.objects],
            "relationships": [i.to_jsonable() for i in self.relationships],
        }


def _pair_overlap(a, b) -> float | None:
    """Mask IoU when both objects carry masks, box IoU as fallback;
    None when geometry is missing on either side."""
    if a.mask is not None and b.mask is not None:
        return iou_mask(a.mask, b.mask)
    if a.box is not None and b.box is not None:
        return iou_box(a.box, b.box)
    return None


def merge_track_ids(
    frames: list[TrackedFrame], tau_mask: float = DEFAULT_TAU_MASK
) -> list[TrackedFrame]:
    """Union-find over (frame, object) nodes, linking temporally
    adjacent objects whose overlap reaches tau_mask. Each component is
    labeled by its minimal node index, so the result is deterministic
    and independent of any incoming track ids (which are replaced)."""
    if not 0.0 <= tau_mask <= 1.0:
        raise ValueError(f"tau_mask {tau_mask} outside [0,1]")

    nodes: list[tuple[int, str]] = []
    index: dict[tuple[int, str], int] = {}
    for fi, frame in enumerate(frames):
        for entry in frame.graph.objects:
            index[(fi, entry.name)] = len(nodes)
            nodes.append((fi, entry.name))

    parent = list(range(len(nodes)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: int, b: int):
        ra, rb = find(a), find(b)
        if ra == rb:
            return
        lo, hi = min(ra, rb), max(ra, rb)
        parent[hi] = lo

    for fi in range(len(frames) - 1):
        for a in frames[fi].graph.objects:
            for b in frames[fi + 1].graph.objects:
                overlap = _pair_overlap(a, b)
                if overlap is not None and overlap >= tau_mask:
                    union(index[(fi, a.name)], index[(fi + 1, b.name)])

    merged = []
    for fi, frame in enumerate(frames):
        ids = {
            entry.name: find(index[(fi, entry.name)]) for entry in frame.graph.objects
        }
        merged.append(TrackedFrame(frame.frame_index, frame.graph, ids))
    return merged


def _object_matches(prev: TrackedFrame, curr: TrackedFrame) -> list[tuple[int, int]]:
    """Match objects by shared track id, falling back to exact name when
    either side lacks an id. One-to-one, earliest-first."""
    matches: list[tuple[int, int]] = []
    used_prev: set[int] = set()
    for ci, curr_obj in enumerate(curr.graph.objects):
        curr_id = curr.track_ids.get(curr_obj.name)
        found = None
        for pi, prev_obj in enumerate(prev.graph.objects):
            if pi in used_prev:
                continue
            prev_id = prev.track_ids.get(prev_obj.name)
            if curr_id is not None and prev_id is not None:
                if curr_id == prev_id:
                    found = pi
                    break
            elif prev_obj.name == curr_obj.name:
                found = pi
                break
        if found is not None:
            used_prev.add(found)
            matches.append((found, ci))
    return matches


def _triplet_str(t: RelationTriplet) -> str:
    return f"{t.subject} [{t.predicate}] {t.object}"


def diff_captions(
    prev: TrackedFrame,
    curr: TrackedFrame,
    embedder: TextEmbedder,
    rho_stable: float = DEFAULT_RHO_STABLE,
) -> DiffReport:
    """Classify the elements of two consecutive frames.

    Objects are matched by identity (track id, falling back to name):
    a matched object is persistent when its description cosine reaches
    rho_stable, altered otherwise. Relationships and overall
    sub-sentences have no identity of their own, so they are matched by
    content (endpoint ids plus predicate cosine / sub-sentence cosine at
    rho_stable); matches are persistent and everything unmatched splits
    into removed + new.
    """
    if not 0.0 <= rho_stable <= 1.0:
        raise ValueError(f"rho_stable {rho_stable} outside [0,1]")
    report = DiffReport()

    texts: list[str] = []
    for frame in (prev, curr):
        texts.extend(o.description for o in frame.graph.objects)
        texts.extend(t.predicate for t in frame.graph.relationships)
        for section in frame.graph.overall:
            texts.extend(split_sentences(section.text))
    unique = sorted(set(texts))
    vectors = dict(zip(unique, embedder.embed(unique)))

    def sim(a: str, b: str) -> float:
        return cosine(vectors[a], vectors[b])

    # objects
    matches = _object_matches(prev, curr)
    matched_prev = {pi for pi, _ in matches}
    matched_curr = {ci for _, ci in matches}
    for pi, ci in matches:
        prev_obj = prev.graph.objects[pi]
        curr_obj = curr.graph.objects[ci]
        stable = sim(prev_obj.description, curr_obj.description) >= rho_stable
        report.objects.append(
            DiffItem(
                "object",
                DiffStatus.PERSISTENT if stable else DiffStatus.ALTERED,
                curr_obj.name,
                previous=prev_obj.description,
                current=curr_obj.description,
            )
        )
    for pi, prev_obj in enumerate(prev.graph.objects):
        if pi not in matched_prev:
            report.objects.append(
                DiffItem("object", DiffStatus.REMOVED, prev_obj.name,
                         previous=prev_obj.description)
            )
    for ci, curr_obj in enumerate(curr.graph.objects):
        if ci not in matched_curr:
            report.objects.append(
                DiffItem("object", DiffStatus.NEW, curr_obj.name,
                         current=curr_obj.description)
            )

    # relationships, matched by (subject id, predicate similarity, object id)
    def endpoint_id(frame: TrackedFrame, name: str):
        return frame.track_ids.get(name, f"name:{name}")

    prev_rels = prev.graph.relationships
    curr_rels = curr.graph.relationships
    used_curr: set[int] = set()
    for pt in prev_rels:
        found = None
        for ri, ct in enumerate(curr_rels):
            if ri in used_curr:
                continue
            if endpoint_id(prev, pt.subject) != endpoint_id(curr, ct.subject):
                continue
            if endpoint_id(prev, pt.object) != endpoint_id(curr, ct.object):
                continue
            if sim(pt.predicate, ct.predicate) >= rho_stable:
                found = ri
                break
        if found is not None:
            used_curr.add(found)
            report.relationships.append(
                DiffItem(
                    "relationship",
                    DiffStatus.PERSISTENT,
                    _triplet_str(curr_rels[found]),
                    previous=_triplet_str(pt),
                    current=_triplet_str(curr_rels[found]),
                )
            )
        else:
            report.relationships.append(
                DiffItem("relationship", DiffStatus.REMOVED, _triplet_str(pt),
                         previous=_triplet_str(pt))
            )
    for ri, ct in enumerate(curr_rels):
        if ri not in used_curr:
            report.relationships.append(
                DiffItem("relationship", DiffStatus.NEW, _triplet_str(ct),
                         current=_triplet_str(ct))
            )

    # overall sub-sentences, matched greedily by best cosine
    prev_subs = [s for sec in prev.graph.overall for s in split_sentences(sec.text)]
    curr_subs = [s for sec in curr.graph.overall for s in split_sentences(sec.text)]
    candidates = [
        (sim(ps, cs), pi, ci)
        for pi, ps in enumerate(prev_subs)
        for ci, cs in enumerate(curr_subs)
        if sim(ps, cs) >= rho_stable
    ]
    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
    used_p: set[int] = set()
    used_c: set[int] = set()
    sub_matches: list[tuple[int, int]] = []
    for _score, pi, ci in candidates:
        if pi in used_p or ci in used_c:
            continue
        used_p.add(pi)
        used_c.add(ci)
        sub_matches.append((pi, ci))
    for pi, ci in sorted(sub_matches):
        report.overall.append(
            DiffItem("overall", DiffStatus.PERSISTENT, curr_subs[ci],
                     previous=prev_subs[pi], current=curr_subs[ci])
        )
    for pi, ps in enumerate(prev_subs):
        if pi not in used_p:
            report.overall.append(
                DiffItem("overall", DiffStatus.REMOVED, ps, previous=ps)
            )
    for ci, cs in enumerate(curr_subs):
        if ci not in used_c:
            report.overall.append(DiffItem("overall", DiffStatus.NEW, cs, current=cs))
    return report
