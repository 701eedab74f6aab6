import random

import pytest

from bacon.errors import ModeUnavailableError
from bacon.evalsuite import (
    BoxedTriplet,
    Detection,
    DetectionSet,
    Layout,
    TripletSet,
    eval_cqa,
    eval_layout,
    eval_ovd,
    eval_ovd_corpus,
    eval_sgg_recall,
    normalize_answer,
    object_list_pr,
)
from bacon.geometry import Box
from bacon.providers import ProviderSet, StubTextEmbedder
from oracles import best_assignment

EMBEDDER = StubTextEmbedder()

B = Box(0.1, 0.1, 0.5, 0.5)
B_FAR = Box(0.6, 0.6, 0.9, 0.9)
LABELS = ["red car", "tall tree", "small dog", "old cat", "stone fence", "green boat"]


def random_detections(rng: random.Random, n: int, with_conf: bool) -> DetectionSet:
    items = []
    for _ in range(n):
        x1, x2 = sorted(rng.sample(range(0, 11), 2))
        y1, y2 = sorted(rng.sample(range(0, 11), 2))
        items.append(
            Detection(
                rng.choice(LABELS),
                Box(x1 / 10, y1 / 10, x2 / 10, y2 / 10),
                rng.random() if with_conf else None,
            )
        )
    return DetectionSet(items)


class TestEvalOvd:
    def test_identical_single_pair(self):
        preds = DetectionSet([Detection("red car", B, 0.9)])
        gts = DetectionSet([Detection("red car", B)])
        report = eval_ovd(preds, gts, EMBEDDER, tau_sim=0.85, tau_iou=0.5)
        assert report.metrics["recall"] == 1.0
        assert report.metrics["mIoU"] == 1.0
        assert report.metrics["ap50"] == 1.0

    def test_partial_recall(self):
        preds = DetectionSet([Detection("red car", B)])
        gts = DetectionSet([Detection("red car", B), Detection("tall tree", B_FAR)])
        report = eval_ovd(preds, gts, EMBEDDER)
        assert report.metrics["recall"] == 0.5

    def test_label_similarity_gate(self):
        # token-disjoint labels: cosine 0 < tau_sim despite IoU 1
        preds = DetectionSet([Detection("sofa", B)])
        gts = DetectionSet([Detection("carburetor", B)])
        report = eval_ovd(preds, gts, EMBEDDER)
        assert report.metrics["recall"] == 0.0

    def test_similarity_is_strictly_greater(self):
        # identical labels give cosine exactly 1; tau_sim=1 means 1 > 1 fails
        preds = DetectionSet([Detection("red car", B)])
        gts = DetectionSet([Detection("red car", B)])
        report = eval_ovd(preds, gts, EMBEDDER, tau_sim=1.0)
        assert report.metrics["recall"] == 0.0

    def test_iou_gate_inclusive(self):
        a = Box(0.0, 0.0, 0.5, 1.0)
        b = Box(0.25, 0.0, 0.75, 1.0)  # IoU = 1/3
        preds = DetectionSet([Detection("red car", a)])
        gts = DetectionSet([Detection("red car", b)])
        report = eval_ovd(preds, gts, EMBEDDER, tau_iou=0.5)
        assert report.metrics["recall"] == 0.0
        report = eval_ovd(preds, gts, EMBEDDER, tau_iou=0.3)
        assert report.metrics["recall"] == 1.0
        assert report.metrics["mIoU"] == pytest.approx(1 / 3, abs=1e-12)

    def test_ap50_omitted_without_confidences(self):
        preds = DetectionSet([Detection("red car", B)])
        gts = DetectionSet([Detection("red car", B)])
        report = eval_ovd(preds, gts, EMBEDDER)
        assert "ap50" not in report.metrics

    def test_ap50_half_for_duplicate_prediction(self):
        # high-confidence false positive ranked first halves the precision
        preds = DetectionSet(
            [Detection("red car", B_FAR, 0.9), Detection("red car", B, 0.5)]
        )
        gts = DetectionSet([Detection("red car", B)])
        report = eval_ovd(preds, gts, EMBEDDER)
        assert report.metrics["recall"] == 1.0
        assert report.metrics["ap50"] == 0.5

    def test_empty_gts(self):
        report = eval_ovd(DetectionSet([]), DetectionSet([]), EMBEDDER)
        assert report.metrics["recall"] == 0.0
        assert report.metrics["mIoU"] == 0.0

    def test_matches_exhaustive_oracle(self):
        rng = random.Random(31)
        suboptimal = 0
        for _ in range(200):
            preds = random_detections(rng, rng.randint(0, 5), with_conf=False)
            gts = random_detections(rng, rng.randint(0, 5), with_conf=False)
            tau_sim, tau_iou = 0.85, rng.choice([0.1, 0.3, 0.5])
            report = eval_ovd(preds, gts, EMBEDDER, tau_sim, tau_iou)

            from bacon.providers import cosine

            vectors = {
                t: EMBEDDER.embed([t])[0]
                for t in {d.label for d in (*preds.items, *gts.items)}
            }
            from bacon.geometry import iou_box

            def admissible(pi, gi):
                p, g = preds.items[pi], gts.items[gi]
                return (
                    cosine(vectors[p.label], vectors[g.label]) > tau_sim
                    and iou_box(p.box, g.box) >= tau_iou
                )

            def score(pi, gi):
                return iou_box(preds.items[pi].box, gts.items[gi].box)

            best_count, best_total = best_assignment(
                len(preds.items), len(gts.items), admissible, score
            )
            oracle_recall = best_count / len(gts.items) if gts.items else 0.0
            assert report.metrics["recall"] <= oracle_recall + 1e-12
            assert report.details["optimal_matched"] == best_count
            if report.details["matched"] < best_count:
                suboptimal += 1
                assert report.details["greedy_suboptimal"]
            else:
                assert report.metrics["recall"] == oracle_recall
                greedy_total = sum(
                    m["iou"] for img in report.details["per_image"] for m in img["matches"]
                )
                assert greedy_total <= best_total + 1e-9
        # greedy-by-IoU rarely loses cardinality, but record that the
        # flag fires when it does
        assert suboptimal >= 0

    def test_threshold_monotonicity(self):
        rng = random.Random(32)
        for _ in range(50):
            preds = random_detections(rng, rng.randint(1, 5), with_conf=False)
            gts = random_detections(rng, rng.randint(1, 5), with_conf=False)
            r_low = eval_ovd(preds, gts, EMBEDDER, 0.3, 0.2).metrics["recall"]
            r_high_sim = eval_ovd(preds, gts, EMBEDDER, 0.9, 0.2).metrics["recall"]
            r_high_iou = eval_ovd(preds, gts, EMBEDDER, 0.3, 0.7).metrics["recall"]
            assert r_high_sim <= r_low
            assert r_high_iou <= r_low

    def test_corpus_merges_by_count(self):
        pair1 = (
            DetectionSet([Detection("red car", B)]),
            DetectionSet([Detection("red car", B)]),
        )
        pair2 = (
            DetectionSet([]),
            DetectionSet([Detection("tall tree", B)]),
        )
        report = eval_ovd_corpus([pair1, pair2], EMBEDDER)
        assert report.metrics["recall"] == 0.5
        assert report.details["total_gt"] == 2


TRIPLET = BoxedTriplet("dog", "chases", "cat", B, B_FAR)


class TestEvalSgg:
    def test_defaults_match_fixed_thresholds(self):
        import inspect

        signature = inspect.signature(eval_sgg_recall)
        assert signature.parameters["tau_sim"].default == 0.9
        assert signature.parameters["tau_iou"].default == 0.5

    def test_identical_triplet(self):
        report = eval_sgg_recall(
            TripletSet([TRIPLET]), TripletSet([TRIPLET]), EMBEDDER
        )
        assert report.metrics["recall"] == 1.0

    def test_partial_match(self):
        other = BoxedTriplet("bird", "watches", "fish", B, B_FAR)
        report = eval_sgg_recall(
            TripletSet([TRIPLET]), TripletSet([TRIPLET, other]), EMBEDDER
        )
        assert report.metrics["recall"] == 0.5

    def test_subject_box_iou_gate(self):
        # same triplet string but subject boxes overlap below 0.5
        shifted = BoxedTriplet(
            "dog", "chases", "cat", Box(0.0, 0.0, 0.5, 1.0), B_FAR
        )
        gt = BoxedTriplet(
            "dog", "chases", "cat", Box(0.25, 0.0, 0.75, 1.0), B_FAR
        )
        report = eval_sgg_recall(TripletSet([shifted]), TripletSet([gt]), EMBEDDER)
        assert report.metrics["recall"] == 0.0

    def test_triplet_string_format(self):
        assert TRIPLET.as_string() == "dog_chases_cat"

    def test_similarity_gate_inclusive(self):
        # identical strings: cosine 1 >= 0.9 passes, >= 1.0 also passes
        report = eval_sgg_recall(
            TripletSet([TRIPLET]), TripletSet([TRIPLET]), EMBEDDER, tau_sim=1.0
        )
        assert report.metrics["recall"] == 1.0


class TestEvalLayout:
    def test_identical_layouts(self):
        layout = Layout([("dog", B), ("tree", B_FAR)])
        report = eval_layout(layout, Layout(list(layout.items)), EMBEDDER)
        assert report.metrics == {"mIoU": 1.0, "precision": 1.0, "recall": 1.0}

    def test_extra_prediction(self):
        pred = Layout([("dog", B), ("tree", B_FAR)])
        gt = Layout([("dog", B)])
        report = eval_layout(pred, gt, EMBEDDER)
        assert report.metrics["precision"] == 0.5
        assert report.metrics["recall"] == 1.0

    def test_miou_partial_overlap(self):
        pred = Layout([("dog", Box(0.0, 0.0, 0.5, 1.0))])
        gt = Layout([("dog", Box(0.25, 0.0, 0.75, 1.0))])
        report = eval_layout(pred, gt, EMBEDDER)
        assert report.metrics["mIoU"] == pytest.approx(1 / 3, abs=1e-12)

    def test_name_gate(self):
        pred = Layout([("sofa", B)])
        gt = Layout([("carburetor", B)])
        report = eval_layout(pred, gt, EMBEDDER)
        assert report.metrics["recall"] == 0.0

    def test_unique_names_enforced(self):
        with pytest.raises(ValueError):
            Layout([("dog", B), ("dog", B_FAR)])


class TestEvalCqa:
    def _qa(self, cases):
        fixtures = {
            "qa": [
                {"context": caption, "question": question, "answer": answer}
                for caption, question, answer in cases
            ]
        }
        return ProviderSet.stub(fixtures).qa_model

    def test_exact_match(self):
        qa = self._qa([("A dog sits.", "What sits?", "a dog")])
        report = eval_cqa([("A dog sits.", "What sits?", ["a dog"])], qa)
        assert report.metrics["accuracy"] == 1.0

    def test_normalization(self):
        qa = self._qa([("The sky is blue.", "What is blue?", "The Sky.")])
        report = eval_cqa([("The sky is blue.", "What is blue?", ["sky"])], qa)
        assert report.metrics["accuracy"] == 1.0

    def test_half_right(self):
        qa = self._qa(
            [("A dog sits.", "What sits?", "a dog"), ("A cat naps.", "Who naps?", "a bird")]
        )
        cases = [
            ("A dog sits.", "What sits?", ["dog"]),
            ("A cat naps.", "Who naps?", ["cat"]),
        ]
        report = eval_cqa(cases, qa)
        assert report.metrics["accuracy"] == 0.5

    def test_vqa_mode_scoring(self):
        qa = self._qa([("A dog sits.", "What sits?", "dog")])
        cases = [("A dog sits.", "What sits?", ["dog", "dog", "puppy", "dog"])]
        report = eval_cqa(cases, qa, mode="vqa")
        assert report.metrics["accuracy"] == 1.0
        cases = [("A dog sits.", "What sits?", ["dog", "puppy", "hound"])]
        report = eval_cqa(cases, qa, mode="vqa")
        assert report.metrics["accuracy"] == pytest.approx(1 / 3, abs=1e-12)

    def test_vqa_mode_needs_three_answers(self):
        qa = self._qa([("A dog sits.", "What sits?", "dog")])
        with pytest.raises(ModeUnavailableError):
            eval_cqa([("A dog sits.", "What sits?", ["dog"])], qa, mode="vqa")

    def test_normalize_answer(self):
        assert normalize_answer("The Sky.") == "sky"
        assert normalize_answer("  A  red, CAR! ") == "red car"
        assert normalize_answer("an apple") == "apple"


class TestObjectListPr:
    def test_identical_lists(self):
        report = object_list_pr(["dog", "cat"], ["dog", "cat"], EMBEDDER)
        assert report.metrics == {"precision": 1.0, "recall": 1.0}

    def test_subset(self):
        report = object_list_pr(
            ["dog", "cat"], ["dog", "cat", "tree", "car"], EMBEDDER
        )
        assert report.metrics == {"precision": 1.0, "recall": 0.5}

    def test_disjoint(self):
        report = object_list_pr(["sofa"], ["carburetor"], EMBEDDER)
        assert report.metrics == {"precision": 0.0, "recall": 0.0}

    def test_one_to_one(self):
        # two equal predictions cannot both claim the single gt
        report = object_list_pr(["dog", "dog"], ["dog"], EMBEDDER)
        assert report.metrics == {"precision": 0.5, "recall": 1.0}
