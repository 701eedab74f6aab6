"""Boxes, run-length masks, overlap measures, and greedy matching.

Everything here is pure: no provider calls, no I/O. Boxes live in
normalized image coordinates; masks are pixel grids encoded as
alternating background/foreground run lengths (row-major, first run is
background and may be zero).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatchError, EmptyMaskError


@dataclass(frozen=True)
class Box:
    """Axis-aligned box, corners in [0,1] with x1 < x2 and y1 < y2."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        for name in ("x1", "y1", "x2", "y2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"box coordinate {name}={v} outside [0,1]")
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValueError(
                f"degenerate box [{self.x1},{self.y1},{self.x2},{self.y2}]"
            )

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    def as_list(self) -> list[float]:
        return [self.x1, self.y1, self.x2, self.y2]

    @classmethod
    def from_list(cls, coords: Sequence[float]) -> "Box":
        if len(coords) != 4:
            raise ValueError(f"box needs 4 coordinates, got {len(coords)}")
        return cls(*(float(c) for c in coords))


def _intersection_area(a: Box, b: Box) -> float:
    w = min(a.x2, b.x2) - max(a.x1, b.x1)
    h = min(a.y2, b.y2) - max(a.y1, b.y1)
    if w <= 0.0 or h <= 0.0:
        return 0.0
    return w * h


def iou_box(a: Box, b: Box) -> float:
    """Intersection over union; symmetric, in [0,1]."""
    inter = _intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    return inter / (a.area + b.area - inter)


def overlap_fraction(obj: Box, region: Box) -> float:
    """Share of ``obj`` covered by ``region``: area(obj ∩ region) / area(obj)."""
    return _intersection_area(obj, region) / obj.area


@dataclass(frozen=True)
class MaskRLE:
    """Row-major run-length mask; runs alternate background/foreground."""

    width: int
    height: int
    runs: tuple[int, ...]

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("mask dimensions must be positive")
        if any(r < 0 for r in self.runs):
            raise ValueError("run lengths must be non-negative")
        if sum(self.runs) != self.width * self.height:
            raise ValueError(
                f"runs sum to {sum(self.runs)}, expected {self.width * self.height}"
            )

    def to_text(self) -> str:
        return f"{self.width}x{self.height}:" + ",".join(str(r) for r in self.runs)

    @classmethod
    def from_text(cls, text: str) -> "MaskRLE":
        dims, _, runs_part = text.partition(":")
        w_str, _, h_str = dims.partition("x")
        try:
            width, height = int(w_str), int(h_str)
            runs = tuple(int(r) for r in runs_part.split(",")) if runs_part else ()
        except ValueError as exc:
            raise ValueError(f"malformed mask text {text!r}") from exc
        return cls(width, height, runs)

    def to_array(self) -> np.ndarray:
        """Decode to a (height, width) boolean array."""
        flat = np.zeros(self.width * self.height, dtype=bool)
        pos = 0
        fg = False
        for run in self.runs:
            if fg:
                flat[pos : pos + run] = True
            pos += run
            fg = not fg
        return flat.reshape(self.height, self.width)

    @classmethod
    def from_array(cls, array: np.ndarray) -> "MaskRLE":
        """Encode a (height, width) boolean array; canonical form, so
        only the first (background) run may be zero."""
        height, width = array.shape
        flat = np.asarray(array, dtype=bool).reshape(-1)
        runs: list[int] = []
        fg = False
        pos = 0
        while pos < flat.size:
            end = pos
            while end < flat.size and flat[end] == fg:
                end += 1
            runs.append(end - pos)
            pos = end
            fg = not fg
        return cls(width, height, tuple(runs))


def iou_mask(a: MaskRLE, b: MaskRLE) -> float:
    """Pixel-exact mask IoU; masks must share dimensions."""
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatchError(
            f"mask dims {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    fa, fb = a.to_array(), b.to_array()
    inter = int(np.count_nonzero(fa & fb))
    union = int(np.count_nonzero(fa | fb))
    if union == 0:
        return 0.0
    return inter / union


def centroid(m: MaskRLE) -> tuple[float, float]:
    """Mean of foreground pixel centers, normalized to [0,1]."""
    arr = m.to_array()
    rows, cols = np.nonzero(arr)
    if rows.size == 0:
        raise EmptyMaskError("mask has no foreground pixels")
    x = float(np.mean(cols + 0.5)) / m.width
    y = float(np.mean(rows + 0.5)) / m.height
    return (x, y)


@dataclass(frozen=True)
class MatchedPair:
    """One matched (prediction, ground truth) pair with its match score."""

    pred_index: int
    gt_index: int
    score: float
    iou: float | None = None
    label_similarity: float | None = None


@dataclass
class MatchResult:
    """One-to-one matching outcome; indices never repeat across fields."""

    pairs: list[MatchedPair] = field(default_factory=list)
    unmatched_pred: list[int] = field(default_factory=list)
    unmatched_gt: list[int] = field(default_factory=list)


def greedy_match(
    preds: Sequence,
    gts: Sequence,
    pair_score: Callable[[object, object], float],
    admissible: Callable[[object, object], bool],
) -> MatchResult:
    """Greedy one-to-one matching over admissible pairs.

    Repeatedly takes the admissible pair with the maximum score; ties
    break toward the lower gt index, then the lower pred index.
    """
    candidates = []
    for gi, gt in enumerate(gts):
        for pi, pred in enumerate(preds):
            if admissible(pred, gt):
                candidates.append((pair_score(pred, gt), gi, pi))
    # Sort so the best pair is last: ascending score, with ties ordered
    # (higher gt, higher pred) first so the preferred pair pops last.
    candidates.sort(key=lambda c: (c[0], -c[1], -c[2]))

    used_pred: set[int] = set()
    used_gt: set[int] = set()
    pairs: list[MatchedPair] = []
    while candidates:
        score, gi, pi = candidates.pop()
        if gi in used_gt or pi in used_pred:
            continue
        used_gt.add(gi)
        used_pred.add(pi)
        pairs.append(MatchedPair(pred_index=pi, gt_index=gi, score=score))
    pairs.sort(key=lambda p: p.gt_index)
    return MatchResult(
        pairs=pairs,
        unmatched_pred=[i for i in range(len(preds)) if i not in used_pred],
        unmatched_gt=[i for i in range(len(gts)) if i not in used_gt],
    )


def max_matching_size(
    n_pred: int,
    n_gt: int,
    admissible: Callable[[int, int], bool],
) -> int:
    """Maximum-cardinality bipartite matching size (augmenting paths).

    Used by evaluators to flag when greedy matching falls short of the
    best achievable matched count.
    """
    adj = [[pi for pi in range(n_pred) if admissible(pi, gi)] for gi in range(n_gt)]
    match_of_pred: list[int | None] = [None] * n_pred

    def try_assign(gi: int, seen: list[bool]) -> bool:
        for pi in adj[gi]:
            if seen[pi]:
                continue
            seen[pi] = True
            if match_of_pred[pi] is None or try_assign(match_of_pred[pi], seen):
                match_of_pred[pi] = gi
                return True
        return False

    size = 0
    for gi in range(n_gt):
        if try_assign(gi, [False] * n_pred):
            size += 1
    return size
