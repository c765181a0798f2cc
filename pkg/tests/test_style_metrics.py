import json
import math

import pytest

from engagement.style_metrics import (AnnotatedSentence, AnnotationError,
                                      Entity, Token, bleu, compute_style,
                                      cross_novel_bleu_baseline,
                                      dependency_distance, entity_density,
                                      load_annotations)
from conftest import make_summary


class TestBleu:
    def test_identical_is_100(self):
        text = "The cat sat on the mat and watched the rain fall outside."
        assert bleu(text, text) == pytest.approx(100.0)

    def test_disjoint_is_zero(self):
        assert bleu("alpha beta gamma", "delta epsilon zeta") == 0.0

    def test_empty_candidate_is_zero(self):
        assert bleu("", "some reference text") == 0.0
        assert bleu("some candidate", "") == 0.0

    def test_case_insensitive(self):
        assert bleu("The Cat Sat", "the cat sat") == pytest.approx(100.0)

    def test_hand_counted_oracle(self):
        # cand = [a b c d], ref = [a b c e]; counts by hand:
        # 1-grams: 3/4 matched (a,b,c); 2-grams: 2/3 (ab,bc) -> smoothed 3/4
        # 3-grams: 1/2 (abc) -> 2/3; 4-grams: 0/1 -> 1/2; lengths equal, BP=1
        expected = 100 * ((3 / 4) * (3 / 4) * (2 / 3) * (1 / 2)) ** 0.25
        assert bleu("a b c d", "a b c e") == pytest.approx(expected, abs=1e-9)

    def test_brevity_penalty(self):
        # cand = [a b], ref = [a b c d]
        # 1-grams 2/2; 2-grams 1/1 smoothed 2/2; 3/4-grams none present:
        # total 0 -> smoothed 1/1 each; BP = exp(1 - 4/2)
        expected = 100 * math.exp(1 - 2.0) * (1 * 1 * 1 * 1) ** 0.25
        assert bleu("a b", "a b c d") == pytest.approx(expected, abs=1e-9)

    def test_range(self):
        s = bleu("one two three four five six", "one two four three six five")
        assert 0 < s < 100


class TestCrossNovelBaseline:
    def test_mean_over_ordered_pairs(self):
        a = make_summary(["a b c d."], summary_id="a", novel_id="n1")
        b = make_summary(["a b x y."], summary_id="b", novel_id="n2")
        want = (bleu(a.text(), b.text()) + bleu(b.text(), a.text())) / 2
        assert cross_novel_bleu_baseline([a, b]) == pytest.approx(want)

    def test_same_novel_pairs_excluded(self):
        a = make_summary(["a b."], summary_id="a", novel_id="n1")
        b = make_summary(["a b."], summary_id="b", novel_id="n1")
        with pytest.raises(ValueError):
            cross_novel_bleu_baseline([a, b])


def sent(heads, entities=()):
    tokens = tuple(Token(text=f"w{i}", head=h) for i, h in enumerate(heads))
    return AnnotatedSentence(tokens=tokens, entities=tuple(entities))


class TestDependencyDistance:
    def test_worked_example(self):
        # heads (1-based positions 1..3): token1 <- token2(root) -> token3
        # distances |1-2| + |3-2| = 2 over 2 non-root tokens ... plus a second
        # sentence with a long arc: |1-4|+|2-4|+|3-4| = 6 over 3 -> pooled 8/6
        # Simplest frozen case: two sentences giving pooled 4/3.
        s1 = sent([2, 0])              # distance 1
        s2 = sent([0, 1, 1])           # distances 1, 2
        assert dependency_distance([s1, s2]) == pytest.approx(4 / 3)

    def test_all_roots_is_none(self):
        assert dependency_distance([sent([0]), sent([0])]) is None

    def test_pooled_not_averaged_per_sentence(self):
        s1 = sent([0, 1])        # one distance: 1
        s2 = sent([0, 1, 1, 1])  # distances 1, 2, 3
        assert dependency_distance([s1, s2]) == pytest.approx(7 / 4)


class TestAnnotationValidation:
    def test_no_root_rejected(self):
        with pytest.raises(AnnotationError):
            sent([2, 1])

    def test_head_out_of_range(self):
        with pytest.raises(AnnotationError):
            sent([0, 5])

    def test_overlapping_entities_rejected(self):
        with pytest.raises(AnnotationError):
            sent([0, 1, 1], [Entity(1, 2, "PERSON"), Entity(2, 3, "GPE")])

    def test_entity_out_of_bounds(self):
        with pytest.raises(AnnotationError):
            sent([0, 1], [Entity(1, 3, "PERSON")])


class TestEntityDensity:
    def test_densities(self):
        s = sent([0, 1, 1, 1, 1],
                 [Entity(1, 1, "PERSON"), Entity(3, 4, "GPE")])
        ents, persons = entity_density([s])
        assert ents == pytest.approx(40.0)     # 2 per 5 tokens
        assert persons == pytest.approx(20.0)  # 1 per 5 tokens

    def test_no_tokens_rejected(self):
        with pytest.raises(AnnotationError):
            entity_density([AnnotatedSentence(tokens=())])


class TestLoadAnnotations:
    def test_roundtrip(self, tmp_path):
        data = {"doc_id": "s1", "sentences": [
            {"tokens": [{"text": "Anna", "head": 2}, {"text": "ran", "head": 0}],
             "entities": [{"start_token": 1, "end_token": 1, "label": "PERSON"}]}]}
        p = tmp_path / "s1.ann.json"
        p.write_text(json.dumps(data), encoding="utf-8")
        sents = load_annotations(p)
        assert len(sents) == 1
        assert sents[0].tokens[0].text == "Anna"
        assert sents[0].entities[0].label == "PERSON"

    def test_missing_sentences_key(self, tmp_path):
        p = tmp_path / "bad.ann.json"
        p.write_text("{}", encoding="utf-8")
        with pytest.raises(AnnotationError, match="sentences"):
            load_annotations(p)

    def test_error_carries_location(self, tmp_path):
        data = {"sentences": [
            {"tokens": [{"text": "ok", "head": 0}]},
            {"tokens": [{"text": "bad", "head": 9}]}]}
        p = tmp_path / "loc.ann.json"
        p.write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(AnnotationError, match="sentence 1"):
            load_annotations(p)

    def test_fixture_annotations_load(self, fixture_corpus_root):
        ann_dir = fixture_corpus_root / "annotations"
        files = sorted(ann_dir.glob("*.ann.json"))
        assert files
        for f in files:
            sents = load_annotations(f)
            assert dependency_distance(sents) is not None


def test_compute_style_bundle():
    summary = make_summary(["Anna ran home.", "She slept."], summary_id="s1")
    anns = [sent([2, 0, 2], [Entity(1, 1, "PERSON")]), sent([2, 0])]
    m = compute_style(summary, anns, reference_text="Anna ran home. She slept.")
    assert m.summary_id == "s1"
    assert m.token_count == 5
    assert m.sentence_count == 2
    assert m.mean_dependency_distance == pytest.approx((1 + 1 + 1) / 3)
    assert m.entities_per_100w == pytest.approx(20.0)
    assert m.persons_per_100w == pytest.approx(20.0)
    assert m.bleu_vs_reference == pytest.approx(100.0)


def test_compute_style_without_annotations():
    summary = make_summary(["Only text."])
    m = compute_style(summary)
    assert m.mean_dependency_distance is None
    assert m.entities_per_100w == 0.0
    assert m.bleu_vs_reference is None
