"""Lexical and syntactic comparison metrics: BLEU overlap, dependency
distance, and named-entity densities from ingested linguistic annotations.

Annotation file schema (shared contract with the annotation exporter):
``{doc_id, sentences: [{tokens: [{text, head}], entities:
[{start_token, end_token, label}]}]}``, one ``<summary-id>.ann.json`` per
summary.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import Summary, tokenize


class AnnotationError(Exception):
    pass


@dataclass(frozen=True)
class Token:
    text: str
    head: int        # 1-based index of syntactic head within sentence, 0 = root


@dataclass(frozen=True)
class Entity:
    start_token: int  # 1-based, inclusive
    end_token: int    # 1-based, inclusive
    label: str


@dataclass(frozen=True)
class AnnotatedSentence:
    tokens: tuple[Token, ...]
    entities: tuple[Entity, ...] = ()

    def __post_init__(self):
        n = len(self.tokens)
        roots = [t for t in self.tokens if t.head == 0]
        if n and not roots:
            raise AnnotationError("sentence has no root token")
        for t in self.tokens:
            if not 0 <= t.head <= n:
                raise AnnotationError(f"head index {t.head} out of range 0..{n}")
        spans = sorted((e.start_token, e.end_token) for e in self.entities)
        for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
            if s2 <= e1:
                raise AnnotationError("overlapping entity spans")
        for e in self.entities:
            if not (1 <= e.start_token <= e.end_token <= n):
                raise AnnotationError(
                    f"entity span ({e.start_token},{e.end_token}) out of bounds")


@dataclass(frozen=True)
class StyleMetrics:
    summary_id: str
    token_count: int
    sentence_count: int
    mean_dependency_distance: float | None
    entities_per_100w: float
    persons_per_100w: float
    bleu_vs_reference: float | None = None

    FIELDS = ("token_count", "sentence_count", "mean_dependency_distance",
              "entities_per_100w", "persons_per_100w", "bleu_vs_reference")


# ---------------------------------------------------------------------------
# BLEU
# ---------------------------------------------------------------------------

def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: str, reference: str) -> float:
    """Document-level BLEU-4 on the 0-100 scale.

    Uniform weights, brevity penalty, lowercased word-rule tokens, and add-one
    smoothing on n-gram orders above 1. Identical texts score 100; an empty
    candidate is 0 by definition.
    """
    cand = [t.lower() for t in tokenize(candidate)]
    ref = [t.lower() for t in tokenize(reference)]
    if not cand or not ref:
        return 0.0

    log_sum = 0.0
    for n in range(1, 5):
        cand_ngrams = _ngrams(cand, n)
        ref_ngrams = _ngrams(ref, n)
        matched = sum(min(cnt, ref_ngrams[g]) for g, cnt in cand_ngrams.items())
        total = sum(cand_ngrams.values())
        if n == 1:
            if matched == 0:
                return 0.0
            p = matched / total
        else:
            p = (matched + 1) / (total + 1)
        log_sum += 0.25 * math.log(p)

    bp = 1.0 if len(cand) >= len(ref) else math.exp(1 - len(ref) / len(cand))
    return 100.0 * bp * math.exp(log_sum)


def cross_novel_bleu_baseline(summaries: list[Summary]) -> float:
    """Mean document BLEU over all ordered pairs of summaries of different novels."""
    scores = [bleu(a.text(), b.text())
              for a, b in itertools.permutations(summaries, 2)
              if a.novel_id != b.novel_id]
    if not scores:
        raise ValueError("no cross-novel pairs")
    return sum(scores) / len(scores)


# ---------------------------------------------------------------------------
# Dependency distance and entity density
# ---------------------------------------------------------------------------

def dependency_distance(sentences: list[AnnotatedSentence]) -> float | None:
    """Mean |position - head position| over all non-root tokens, pooled."""
    distances = []
    for sent in sentences:
        for pos, tok in enumerate(sent.tokens, start=1):
            if tok.head != 0:
                distances.append(abs(pos - tok.head))
    if not distances:
        return None
    return sum(distances) / len(distances)


def entity_density(sentences: list[AnnotatedSentence]) -> tuple[float, float]:
    """(entities per 100 tokens, PERSON entities per 100 tokens)."""
    total_tokens = sum(len(s.tokens) for s in sentences)
    if total_tokens < 1:
        raise AnnotationError("entity_density needs at least one token")
    n_entities = sum(len(s.entities) for s in sentences)
    n_persons = sum(1 for s in sentences for e in s.entities if e.label == "PERSON")
    return (100 * n_entities / total_tokens, 100 * n_persons / total_tokens)


# ---------------------------------------------------------------------------
# Annotation loading
# ---------------------------------------------------------------------------

def load_annotations(path: Path) -> list[AnnotatedSentence]:
    """Load and validate one annotation file; errors carry the location."""
    path = Path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    if "sentences" not in data:
        raise AnnotationError(f"{path}: missing 'sentences'")
    out = []
    for i, sent in enumerate(data["sentences"]):
        try:
            tokens = tuple(Token(text=t["text"], head=int(t["head"]))
                           for t in sent["tokens"])
            entities = tuple(Entity(start_token=int(e["start_token"]),
                                    end_token=int(e["end_token"]),
                                    label=e["label"])
                             for e in sent.get("entities", []))
            out.append(AnnotatedSentence(tokens=tokens, entities=entities))
        except (KeyError, TypeError, ValueError, AnnotationError) as e:
            raise AnnotationError(f"{path}: sentence {i}: {e}")
    return out


def compute_style(summary: Summary,
                  annotations: list[AnnotatedSentence] | None = None,
                  reference_text: str | None = None) -> StyleMetrics:
    """Style metrics for one summary; annotation-based fields need annotations."""
    dep = dependency_distance(annotations) if annotations else None
    if annotations:
        ents, persons = entity_density(annotations)
    else:
        ents = persons = 0.0
    return StyleMetrics(
        summary_id=summary.id,
        token_count=sum(s.token_count for s in summary.sentences),
        sentence_count=summary.n_sentences,
        mean_dependency_distance=dep,
        entities_per_100w=ents,
        persons_per_100w=persons,
        bleu_vs_reference=(bleu(summary.text(), reference_text)
                           if reference_text else None),
    )
