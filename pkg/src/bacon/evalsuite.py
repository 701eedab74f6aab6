"""Deterministic metric computations over predictions and ground truth:
open-vocabulary detection, scene-graph triplet recall, layout quality,
caption question answering, and object-list precision/recall.

Label matching is open-vocabulary throughout: labels (or triplet
strings) are embedded and compared by cosine similarity against a
threshold instead of requiring identical class ids. Matching is greedy
and one-to-one; every report also carries the maximum achievable match
count so greedy shortfalls are flagged rather than hidden.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ModeUnavailableError
from .geometry import Box, greedy_match, iou_box, max_matching_size
from .providers import QAModel, TextEmbedder, cosine

DEFAULT_TAU_SIM_OVD = 0.85
DEFAULT_TAU_IOU_OVD = 0.5
DEFAULT_TAU_SIM_SGG = 0.9
DEFAULT_TAU_IOU_SGG = 0.5
DEFAULT_TAU_NAME = 0.85


@dataclass(frozen=True)
class Detection:
    label: str
    box: Box
    confidence: float | None = None

    def __post_init__(self):
        if self.confidence is not None and not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0,1]")


@dataclass
class DetectionSet:
    items: list[Detection] = field(default_factory=list)


@dataclass(frozen=True)
class BoxedTriplet:
    subject: str
    predicate: str
    object: str
    subject_box: Box
    object_box: Box

    def as_string(self) -> str:
        return f"{self.subject}_{self.predicate}_{self.object}"


@dataclass
class TripletSet:
    items: list[BoxedTriplet] = field(default_factory=list)


@dataclass
class Layout:
    """Named boxes; names unique."""

    items: list[tuple[str, Box]] = field(default_factory=list)

    def __post_init__(self):
        names = [name for name, _ in self.items]
        if len(names) != len(set(names)):
            raise ValueError("layout names must be unique")


@dataclass
class EvalReport:
    metrics: dict[str, float]
    details: dict = field(default_factory=dict)

    def to_jsonable(self) -> dict:
        return {"metrics": self.metrics, "details": self.details}


def _embed_unique(texts: Sequence[str], embedder: TextEmbedder) -> dict:
    unique = sorted(set(texts))
    vectors = embedder.embed(unique)
    return dict(zip(unique, vectors))


def _match_records(pairs, sims, ious) -> list[dict]:
    return [
        {
            "pred": p.pred_index,
            "gt": p.gt_index,
            "iou": ious[(p.pred_index, p.gt_index)],
            "label_similarity": sims[(p.pred_index, p.gt_index)],
        }
        for p in pairs
    ]


def eval_ovd(
    preds: DetectionSet,
    gts: DetectionSet,
    embedder: TextEmbedder,
    tau_sim: float = DEFAULT_TAU_SIM_OVD,
    tau_iou: float = DEFAULT_TAU_IOU_OVD,
) -> EvalReport:
    """Open-vocabulary detection metrics for one image pair.

    A (pred, gt) pair is admissible when the label cosine is strictly
    above tau_sim and box IoU is at least tau_iou; matching is greedy by
    IoU. ap50 appears only when every prediction carries a confidence.
    """
    return eval_ovd_corpus([(preds, gts)], embedder, tau_sim, tau_iou)


def eval_ovd_corpus(
    pairs: Sequence[tuple[DetectionSet, DetectionSet]],
    embedder: TextEmbedder,
    tau_sim: float = DEFAULT_TAU_SIM_OVD,
    tau_iou: float = DEFAULT_TAU_IOU_OVD,
) -> EvalReport:
    labels = [
        d.label for preds, gts in pairs for d in (*preds.items, *gts.items)
    ]
    vectors = _embed_unique(labels, embedder)

    total_gt = 0
    total_pred = 0
    matched = 0
    optimal = 0
    iou_sum = 0.0
    per_image = []
    ap_entries = []  # (confidence, image_index, pred_index)
    have_conf = all(
        d.confidence is not None for preds, _ in pairs for d in preds.items
    )

    per_image_state = []
    for img_i, (preds, gts) in enumerate(pairs):
        sims = {}
        ious = {}
        for pi, p in enumerate(preds.items):
            for gi, g in enumerate(gts.items):
                sims[(pi, gi)] = cosine(vectors[p.label], vectors[g.label])
                ious[(pi, gi)] = iou_box(p.box, g.box)

        def admissible(p, g, _s=sims, _i=ious):
            return _s[(p[0], g[0])] > tau_sim and _i[(p[0], g[0])] >= tau_iou

        def score(p, g, _i=ious):
            return _i[(p[0], g[0])]

        indexed_preds = list(enumerate(preds.items))
        indexed_gts = list(enumerate(gts.items))
        result = greedy_match(indexed_preds, indexed_gts, score, admissible)
        best = max_matching_size(
            len(preds.items),
            len(gts.items),
            lambda pi, gi: sims[(pi, gi)] > tau_sim and ious[(pi, gi)] >= tau_iou,
        )
        total_gt += len(gts.items)
        total_pred += len(preds.items)
        matched += len(result.pairs)
        optimal += best
        iou_sum += sum(p.score for p in result.pairs)
        per_image.append(
            {
                "matches": _match_records(result.pairs, sims, ious),
                "unmatched_pred": result.unmatched_pred,
                "unmatched_gt": result.unmatched_gt,
            }
        )
        per_image_state.append((sims, ious, [False] * len(gts.items)))
        if have_conf:
            for pi, p in enumerate(preds.items):
                ap_entries.append((p.confidence, img_i, pi))

    recall = matched / total_gt if total_gt else 0.0
    miou = iou_sum / matched if matched else 0.0
    metrics = {"recall": recall, "mIoU": miou}

    if have_conf and total_pred:
        metrics["ap50"] = _ap_sweep(
            ap_entries, pairs, per_image_state, tau_sim, tau_iou, total_gt
        )

    details = {
        "matched": matched,
        "total_gt": total_gt,
        "total_pred": total_pred,
        "optimal_matched": optimal,
        "greedy_suboptimal": matched < optimal,
        "per_image": per_image,
    }
    return EvalReport(metrics=metrics, details=details)


def _ap_sweep(entries, pairs, per_image_state, tau_sim, tau_iou, total_gt) -> float:
    """All-point interpolated average precision over the pooled,
    confidence-ranked predictions."""
    if total_gt == 0:
        return 0.0
    ranked = sorted(entries, key=lambda e: (-e[0], e[1], e[2]))
    tp_flags = []
    for _conf, img_i, pi in ranked:
        sims, ious, gt_used = per_image_state[img_i]
        n_gt = len(pairs[img_i][1].items)
        best_gi = None
        best_iou = -1.0
        for gi in range(n_gt):
            if gt_used[gi]:
                continue
            if sims[(pi, gi)] > tau_sim and ious[(pi, gi)] >= tau_iou:
                if ious[(pi, gi)] > best_iou:
                    best_iou = ious[(pi, gi)]
                    best_gi = gi
        if best_gi is not None:
            gt_used[best_gi] = True
            tp_flags.append(True)
        else:
            tp_flags.append(False)

    precisions = []
    recalls = []
    tp = 0
    for k, flag in enumerate(tp_flags, start=1):
        tp += int(flag)
        precisions.append(tp / k)
        recalls.append(tp / total_gt)
    # precision envelope from the right
    for k in range(len(precisions) - 2, -1, -1):
        precisions[k] = max(precisions[k], precisions[k + 1])
    ap = 0.0
    prev_recall = 0.0
    for k, flag in enumerate(tp_flags):
        if flag:
            ap += (recalls[k] - prev_recall) * precisions[k]
            prev_recall = recalls[k]
    return ap


def eval_sgg_recall(
    preds: TripletSet,
    gts: TripletSet,
    embedder: TextEmbedder,
    tau_sim: float = DEFAULT_TAU_SIM_SGG,
    tau_iou: float = DEFAULT_TAU_IOU_SGG,
) -> EvalReport:
    """Triplet recall: each prediction and ground truth becomes the
    string "{subject}_{predicate}_{object}"; a pair is admissible when
    the string cosine is at least tau_sim and both the subject-box and
    object-box IoUs are at least tau_iou. Greedy matching by cosine."""
    strings = [t.as_string() for t in (*preds.items, *gts.items)]
    vectors = _embed_unique(strings, embedder)

    sims = {}
    box_ok = {}
    for pi, p in enumerate(preds.items):
        for gi, g in enumerate(gts.items):
            sims[(pi, gi)] = cosine(vectors[p.as_string()], vectors[g.as_string()])
            box_ok[(pi, gi)] = (
                iou_box(p.subject_box, g.subject_box) >= tau_iou
                and iou_box(p.object_box, g.object_box) >= tau_iou
            )

    def admissible(p, g):
        return sims[(p[0], g[0])] >= tau_sim and box_ok[(p[0], g[0])]

    def score(p, g):
        return sims[(p[0], g[0])]

    result = greedy_match(
        list(enumerate(preds.items)), list(enumerate(gts.items)), score, admissible
    )
    best = max_matching_size(
        len(preds.items),
        len(gts.items),
        lambda pi, gi: sims[(pi, gi)] >= tau_sim and box_ok[(pi, gi)],
    )
    matched = len(result.pairs)
    recall = matched / len(gts.items) if gts.items else 0.0
    details = {
        "matched": matched,
        "total_gt": len(gts.items),
        "total_pred": len(preds.items),
        "optimal_matched": best,
        "greedy_suboptimal": matched < best,
        "matches": [
            {"pred": p.pred_index, "gt": p.gt_index, "similarity": p.score}
            for p in result.pairs
        ],
        "unmatched_gt": result.unmatched_gt,
    }
    return EvalReport(metrics={"recall": recall}, details=details)


def eval_layout(
    pred: Layout,
    gt: Layout,
    embedder: TextEmbedder,
    tau_name: float = DEFAULT_TAU_NAME,
) -> EvalReport:
    """Layout quality: pairs are admissible when the name cosine is at
    least tau_name; matching is greedy by box IoU."""
    names = [n for n, _ in (*pred.items, *gt.items)]
    vectors = _embed_unique(names, embedder)

    sims = {}
    ious = {}
    for pi, (pn, pb) in enumerate(pred.items):
        for gi, (gn, gb) in enumerate(gt.items):
            sims[(pi, gi)] = cosine(vectors[pn], vectors[gn])
            ious[(pi, gi)] = iou_box(pb, gb)

    def admissible(p, g):
        return sims[(p[0], g[0])] >= tau_name

    def score(p, g):
        return ious[(p[0], g[0])]

    result = greedy_match(
        list(enumerate(pred.items)), list(enumerate(gt.items)), score, admissible
    )
    matched = len(result.pairs)
    precision = matched / len(pred.items) if pred.items else 0.0
    recall = matched / len(gt.items) if gt.items else 0.0
    miou = sum(p.score for p in result.pairs) / matched if matched else 0.0
    details = {
        "matched": matched,
        "total_gt": len(gt.items),
        "total_pred": len(pred.items),
        "matches": _match_records(result.pairs, sims, ious),
    }
    return EvalReport(
        metrics={"mIoU": miou, "precision": precision, "recall": recall},
        details=details,
    )


_ARTICLES = frozenset({"a", "an", "the"})
_PUNCT_RE = re.compile(r"[^\w\s]")


def normalize_answer(text: str) -> str:
    """Lowercase, strip punctuation and articles, collapse whitespace."""
    cleaned = _PUNCT_RE.sub(" ", text.lower())
    return " ".join(t for t in cleaned.split() if t not in _ARTICLES)


def eval_cqa(
    cases: Sequence[tuple[str, str, list[str]]],
    qa: QAModel,
    mode: str = "exact",
) -> EvalReport:
    """Caption question answering: the QA model answers each question
    from the caption text alone; answers are compared after
    normalization. mode="vqa" uses the multi-annotator rule
    min(matches/3, 1) and needs >= 3 ground-truth answers per case."""
    if mode not in ("exact", "vqa"):
        raise ValueError(f"unknown mode {mode!r}")
    if not cases:
        raise ValueError("need at least one case")
    per_case = []
    total = 0.0
    for caption, question, gt_answers in cases:
        answer = qa.answer(caption, question)
        norm = normalize_answer(answer)
        norm_gts = [normalize_answer(g) for g in gt_answers]
        if mode == "exact":
            score = float(norm in norm_gts)
        else:
            if len(gt_answers) < 3:
                raise ModeUnavailableError(
                    f"vqa mode needs >=3 gt answers, got {len(gt_answers)}"
                )
            score = min(sum(1 for g in norm_gts if g == norm) / 3.0, 1.0)
        total += score
        per_case.append({"question": question, "answer": answer, "score": score})
    accuracy = total / len(cases)
    return EvalReport(metrics={"accuracy": accuracy}, details={"per_case": per_case})


def object_list_pr(
    pred_names: Sequence[str],
    gt_names: Sequence[str],
    embedder: TextEmbedder,
    tau_name: float = DEFAULT_TAU_NAME,
) -> EvalReport:
    """Object-list precision/recall with greedy one-to-one matching on
    name cosine >= tau_name."""
    vectors = _embed_unique([*pred_names, *gt_names], embedder)
    sims = {
        (pi, gi): cosine(vectors[p], vectors[g])
        for pi, p in enumerate(pred_names)
        for gi, g in enumerate(gt_names)
    }

    result = greedy_match(
        list(enumerate(pred_names)),
        list(enumerate(gt_names)),
        lambda p, g: sims[(p[0], g[0])],
        lambda p, g: sims[(p[0], g[0])] >= tau_name,
    )
    matched = len(result.pairs)
    precision = matched / len(pred_names) if pred_names else 0.0
    recall = matched / len(gt_names) if gt_names else 0.0
    details = {
        "matched": matched,
        "total_gt": len(gt_names),
        "total_pred": len(pred_names),
        "matches": [
            {"pred": p.pred_index, "gt": p.gt_index, "similarity": p.score}
            for p in result.pairs
        ],
    }
    return EvalReport(metrics={"precision": precision, "recall": recall}, details=details)
