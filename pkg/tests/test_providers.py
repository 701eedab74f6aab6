import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bacon.errors import BackendUnavailableError
from bacon.geometry import Box
from bacon.providers import (
    ProviderSet,
    StubProviderSet,
    StubTextEmbedder,
    cosine,
    tokenize,
)
from oracles import bag_of_words_cosine

EMBEDDER = StubTextEmbedder()


def _stub_cosine(a: str, b: str) -> float:
    va, vb = EMBEDDER.embed([a, b])
    return cosine(va, vb)


def _no_bucket_collisions(*texts: str) -> bool:
    from bacon.providers import _fnv1a

    tokens = {t for text in texts for t in tokenize(text)}
    return len({_fnv1a(t) % EMBEDDER.dim for t in tokens}) == len(tokens)


class TestStubEmbedder:
    def test_deterministic(self):
        a1 = EMBEDDER.embed(["a red car"])[0]
        a2 = EMBEDDER.embed(["a red car"])[0]
        assert np.array_equal(a1, a2)

    def test_identical_texts_cosine_one(self):
        assert _stub_cosine("a red car", "a red car") == 1.0

    def test_unit_norm_or_zero(self):
        for text in ["a red car", "", "  !!  ", "one two three four"]:
            vec = EMBEDDER.embed([text])[0]
            norm = np.linalg.norm(vec)
            if tokenize(text):
                assert norm == pytest.approx(1.0, abs=1e-6)
            else:
                assert norm == 0.0

    def test_hand_computed_one_third(self):
        # {a, tall, tree} vs {a, red, car}: one shared token of three
        assert _no_bucket_collisions("a tall tree", "a red car")
        assert _stub_cosine("a tall tree", "a red car") == pytest.approx(1 / 3, abs=1e-12)

    def test_hand_computed_two_thirds(self):
        assert _no_bucket_collisions("a running dog", "a sleeping dog")
        assert _stub_cosine("a running dog", "a sleeping dog") == pytest.approx(
            2 / 3, abs=1e-12
        )

    def test_token_disjoint_cosine_zero(self):
        assert _stub_cosine("red car", "tall tree") == 0.0

    def test_empty_vs_nonempty_cosine_zero(self):
        assert _stub_cosine("", "a red car") == 0.0

    def test_empty_vs_empty_cosine_one(self):
        assert _stub_cosine("", "...") == 1.0

    def test_batch_size_preserved(self):
        vecs = EMBEDDER.embed(["a", "b", "c"])
        assert len(vecs) == 3

    def test_case_and_punctuation_folding(self):
        assert _stub_cosine("A Red Car!", "a red car") == 1.0

    @given(st.text(max_size=40), st.text(max_size=40))
    def test_cosine_symmetric_and_bounded(self, a, b):
        va, vb = EMBEDDER.embed([a, b])
        s = cosine(va, vb)
        assert s == cosine(vb, va)
        assert 0.0 <= s <= 1.0 + 1e-12

    @given(st.lists(st.sampled_from(["dog", "cat", "red", "car", "tree"]), max_size=6))
    def test_identical_token_multisets_score_one(self, tokens):
        text_a = " ".join(tokens)
        text_b = ", ".join(tokens).upper()
        assert _stub_cosine(text_a, text_b) == 1.0

    def test_matches_counting_oracle_on_collision_free_vocab(self):
        texts = [
            "a small brown dog",
            "a tall green tree",
            "the red car waits",
            "dog chases car",
            "quiet stone fence",
        ]
        assert _no_bucket_collisions(*texts)
        for a in texts:
            for b in texts:
                assert _stub_cosine(a, b) == pytest.approx(
                    bag_of_words_cosine(a, b), abs=1e-12
                )


FIXTURES = {
    "propose": [
        {
            "image_id": "img1",
            "query": "dog",
            "regions": [
                {"box": [0.1, 0.1, 0.4, 0.4], "confidence": 0.9},
                {"box": [0.5, 0.5, 0.8, 0.8], "confidence": 0.7},
                {"box": [0.2, 0.2, 0.6, 0.6], "confidence": 0.4},
            ],
        },
        {"image_id": "img1", "query": "ghost", "regions": []},
    ],
    "judge": [
        {
            "image_id": "img1",
            "box": [0.1, 0.1, 0.4, 0.4],
            "name": "dog 1",
            "keep": True,
            "score": 0.8,
        },
        {
            "image_id": "img1",
            "box": [0.5, 0.5, 0.8, 0.8],
            "name": "dog 1",
            "keep": False,
            "score": 0.2,
        },
    ],
    "score_crop": [
        {
            "image_id": "img1",
            "box": [0.1, 0.1, 0.4, 0.4],
            "text": "a small brown dog",
            "score": 0.75,
        }
    ],
    "qa": [{"context": "A dog sits.", "question": "What sits?", "answer": "a dog"}],
}


class TestFixtureStubs:
    def setup_method(self):
        self.providers = ProviderSet.stub(FIXTURES)

    def test_propose_confidence_sorted(self):
        regions = self.providers.region_proposer.propose_regions("img1", "dog")
        assert [r.detector_confidence for r in regions] == [0.9, 0.7, 0.4]

    def test_propose_empty_fixture(self):
        assert self.providers.region_proposer.propose_regions("img1", "ghost") == []

    def test_propose_unknown_image(self):
        with pytest.raises(BackendUnavailableError):
            self.providers.region_proposer.propose_regions("nope", "dog")

    def test_judge_keep_and_drop(self):
        keep, score = self.providers.region_judge.judge_region(
            "img1", Box(0.1, 0.1, 0.4, 0.4), "dog 1"
        )
        assert keep is True and score == 0.8
        keep, score = self.providers.region_judge.judge_region(
            "img1", Box(0.5, 0.5, 0.8, 0.8), "dog 1"
        )
        assert keep is False and score == 0.2

    def test_judge_missing_fixture(self):
        with pytest.raises(BackendUnavailableError):
            self.providers.region_judge.judge_region(
                "img1", Box(0.0, 0.0, 0.1, 0.1), "dog 1"
            )

    def test_score_crop(self):
        score = self.providers.crop_embedder.score_crop(
            "img1", Box(0.1, 0.1, 0.4, 0.4), "a small brown dog"
        )
        assert score == 0.75

    def test_score_crop_missing_fixture(self):
        with pytest.raises(BackendUnavailableError):
            self.providers.crop_embedder.score_crop(
                "img1", Box(0.1, 0.1, 0.4, 0.4), "something else"
            )

    def test_qa_answer(self):
        assert self.providers.qa_model.answer("A dog sits.", "What sits?") == "a dog"

    def test_qa_empty_context_unknown(self):
        assert self.providers.qa_model.answer("", "What sits?") == "unknown"

    def test_qa_missing_fixture(self):
        with pytest.raises(BackendUnavailableError):
            self.providers.qa_model.answer("A dog sits.", "Who barks?")

    def test_repeated_calls_byte_identical(self):
        first = self.providers.region_proposer.propose_regions("img1", "dog")
        second = self.providers.region_proposer.propose_regions("img1", "dog")
        assert first == second

    def test_from_file(self, tmp_path):
        import json

        path = tmp_path / "fixtures.json"
        path.write_text(json.dumps(FIXTURES))
        providers = ProviderSet.stub(path)
        assert providers.qa_model.answer("A dog sits.", "What sits?") == "a dog"

    def test_empty_providerset(self):
        providers = ProviderSet.stub()
        with pytest.raises(BackendUnavailableError):
            providers.region_proposer.propose_regions("any", "dog")
