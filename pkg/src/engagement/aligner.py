"""Build sentence-to-chapter alignment graphs: LLM protocol plus the TF-IDF
and embedding baselines.

Graph serialization: ``{summary_id, novel_id, n_sentences, n_chapters, method,
edges: [[s, c], ...], diagnostics: [...]}`` with edges sorted lexicographically.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Novel, Summary, count_tokens, tokenize
from .gateway import ChatRequest, GatewayError, Transport, complete
from .prompts import render_alignment_prompt

METHODS = ("llm", "tfidf", "embedding", "gold")


class AlignmentError(Exception):
    pass


class AlignmentParseError(AlignmentError):
    """Aligner response could not be parsed into per-sentence YES/NO answers."""


@dataclass(frozen=True)
class AlignmentGraph:
    summary_id: str
    novel_id: str
    n_sentences: int
    n_chapters: int
    edges: frozenset[tuple[int, int]]
    method: str
    diagnostics: tuple = ()

    def __post_init__(self):
        if self.method not in METHODS:
            raise AlignmentError(f"unknown method {self.method!r}")
        for s, c in self.edges:
            if not (1 <= s <= self.n_sentences and 1 <= c <= self.n_chapters):
                raise AlignmentError(
                    f"edge ({s},{c}) out of bounds for {self.n_sentences}x{self.n_chapters}")

    def to_dict(self) -> dict:
        return {
            "summary_id": self.summary_id,
            "novel_id": self.novel_id,
            "n_sentences": self.n_sentences,
            "n_chapters": self.n_chapters,
            "method": self.method,
            "edges": [list(e) for e in sorted(self.edges)],
            "diagnostics": list(self.diagnostics),
        }

    def save(self, path: Path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")

    @classmethod
    def from_dict(cls, data: dict) -> "AlignmentGraph":
        return cls(
            summary_id=data["summary_id"],
            novel_id=data["novel_id"],
            n_sentences=data["n_sentences"],
            n_chapters=data["n_chapters"],
            edges=frozenset((s, c) for s, c in data["edges"]),
            method=data["method"],
            diagnostics=tuple(data.get("diagnostics", ())),
        )

    @classmethod
    def load(cls, path: Path) -> "AlignmentGraph":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class EmbeddingTable:
    dimension: int
    vectors: dict[str, np.ndarray]

    def __post_init__(self):
        for unit_id, v in self.vectors.items():
            if v.shape != (self.dimension,):
                raise AlignmentError(f"vector {unit_id!r} has wrong dimension")
            if np.isnan(v).any():
                raise AlignmentError(f"vector {unit_id!r} contains NaN")

    @classmethod
    def load(cls, path: Path) -> "EmbeddingTable":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(dimension=data["dimension"],
                   vectors={k: np.asarray(v, dtype=float)
                            for k, v in data["vectors"].items()})


def sentence_unit_id(summary_id: str, index: int) -> str:
    return f"{summary_id}/s{index}"


def chapter_unit_id(novel_id: str, index: int) -> str:
    return f"{novel_id}/c{index}"


# ---------------------------------------------------------------------------
# Response parsing
# ---------------------------------------------------------------------------

_YES = {"yes"}
_NO = {"no"}


def parse_alignment_response(text: str, n_sentences: int) -> set[int]:
    """Extract per-sentence YES answers from the first JSON object in *text*.

    Tolerates surrounding prose and code fences. Any key outside 1..n or any
    value besides YES/NO is a parse error (the caller retries).
    """
    if n_sentences < 1:
        raise ValueError("n_sentences must be >= 1")
    start = text.find("{")
    if start == -1:
        raise AlignmentParseError("no JSON object found in response")
    depth = 0
    end = None
    for i in range(start, len(text)):
        if text[i] == "{":
            depth += 1
        elif text[i] == "}":
            depth -= 1
            if depth == 0:
                end = i + 1
                break
    if end is None:
        raise AlignmentParseError("unbalanced JSON object in response")
    try:
        obj = json.loads(text[start:end])
    except json.JSONDecodeError as e:
        raise AlignmentParseError(f"invalid JSON in response: {e.msg}")
    if not isinstance(obj, dict):
        raise AlignmentParseError("response JSON is not an object")

    yes: set[int] = set()
    for k, v in obj.items():
        try:
            idx = int(k)
        except (TypeError, ValueError):
            raise AlignmentParseError(f"non-integer key {k!r}")
        if not 1 <= idx <= n_sentences:
            raise AlignmentParseError(f"key {idx} outside 1..{n_sentences}")
        label = str(v).strip().lower()
        if label in _YES:
            yes.add(idx)
        elif label not in _NO:
            raise AlignmentParseError(f"value {v!r} is not YES/NO")
    return yes


# ---------------------------------------------------------------------------
# LLM alignment
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlignerConfig:
    model: str
    temperature: float = 0.0
    max_output_tokens: int = 2048
    parse_retries: int = 3
    context_budget_tokens: int | None = None


def _split_chapter(text: str, parts: int) -> list[str]:
    """Split chapter text at paragraph boundaries into near-equal parts."""
    paragraphs = re.split(r"\n\s*\n", text)
    if len(paragraphs) < parts:
        return paragraphs
    total = sum(len(p) for p in paragraphs)
    target = total / parts
    chunks, current, size = [], [], 0
    for p in paragraphs:
        current.append(p)
        size += len(p)
        if size >= target and len(chunks) < parts - 1:
            chunks.append("\n\n".join(current))
            current, size = [], 0
    if current:
        chunks.append("\n\n".join(current))
    return chunks


def _query_chapter(summary: Summary, chapter_text: str, old_ids: set[int],
                   transport: Transport, config: AlignerConfig,
                   diagnostics: list) -> set[int] | None:
    prompt = render_alignment_prompt(summary, chapter_text, old_ids)
    req = ChatRequest(model=config.model, prompt=prompt,
                      temperature=config.temperature,
                      max_output_tokens=config.max_output_tokens)
    for attempt in range(config.parse_retries + 1):
        response = complete(req, transport)
        try:
            return parse_alignment_response(response.text, summary.n_sentences)
        except AlignmentParseError as e:
            last_error = str(e)
    diagnostics.append({"event": "parse_failure", "error": last_error,
                        "request_key": req.request_key})
    return None


def align_llm(summary: Summary, novel: Novel, transport: Transport,
              config: AlignerConfig) -> AlignmentGraph:
    """Iterate chapters in order, threading previously-matched ids forward.

    The per-summary loop is strictly sequential: old_ids for chapter i is the
    set of sentences matched to any chapter < i. Unparseable chapters yield
    zero edges and a diagnostic entry.
    """
    if summary.novel_id != novel.id:
        raise AlignmentError(
            f"summary {summary.id!r} references {summary.novel_id!r}, not {novel.id!r}")

    edges: set[tuple[int, int]] = set()
    diagnostics: list = []
    summary_tokens = count_tokens(summary.text())

    for chapter in novel.chapters:
        old_ids = {s for s, c in edges if c < chapter.index}
        diagnostics.append({"event": "chapter_query", "chapter": chapter.index,
                            "old_ids": sorted(old_ids)})

        budget = config.context_budget_tokens
        if budget and summary_tokens + chapter.token_count > budget:
            # Oversized chapter: split at paragraph boundaries, union YES sets.
            parts = math.ceil(chapter.token_count / max(budget - summary_tokens, 1))
            pieces = _split_chapter(chapter.text, parts)
            diagnostics.append({"event": "chapter_split",
                                "chapter": chapter.index, "parts": len(pieces)})
        else:
            pieces = [chapter.text]

        for piece in pieces:
            yes = _query_chapter(summary, piece, old_ids, transport, config,
                                 diagnostics)
            if yes is None:
                diagnostics.append({"event": "chapter_skipped",
                                    "chapter": chapter.index})
                continue
            edges.update((s, chapter.index) for s in yes)

    return AlignmentGraph(summary_id=summary.id, novel_id=novel.id,
                          n_sentences=summary.n_sentences,
                          n_chapters=novel.n_chapters,
                          edges=frozenset(edges), method="llm",
                          diagnostics=tuple(json.dumps(d, sort_keys=True)
                                            for d in diagnostics))


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------

def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def align_tfidf(summary: Summary, novel: Novel) -> AlignmentGraph:
    """One edge per sentence to the argmax-cosine chapter under TF-IDF.

    Scheme: documents are chapters, terms are lowercased tokens, tf is the raw
    count, idf = ln(n_chapters / (1 + df)) + 1. Sentence vectors reuse the
    chapter-derived idf. Ties break to the lowest chapter index; sentences with
    no in-vocabulary tokens get no edge.
    """
    chapter_tokens = [[t.lower() for t in tokenize(ch.text)] for ch in novel.chapters]
    vocab = sorted({t for toks in chapter_tokens for t in toks})
    term_index = {t: i for i, t in enumerate(vocab)}
    n = novel.n_chapters

    df = Counter()
    for toks in chapter_tokens:
        df.update(set(toks))
    idf = np.array([math.log(n / (1 + df[t])) + 1 for t in vocab])

    chapter_matrix = np.zeros((n, len(vocab)))
    for row, toks in enumerate(chapter_tokens):
        for t, cnt in Counter(toks).items():
            chapter_matrix[row, term_index[t]] = cnt
    chapter_matrix *= idf

    edges = set()
    diagnostics = []
    for sent in summary.sentences:
        vec = np.zeros(len(vocab))
        for t, cnt in Counter(t.lower() for t in tokenize(sent.text)).items():
            if t in term_index:
                vec[term_index[t]] = cnt
        if not vec.any():
            diagnostics.append(f"sentence {sent.index}: no in-vocabulary tokens")
            continue
        vec *= idf
        sims = [_cosine(vec, chapter_matrix[row]) for row in range(n)]
        best = int(np.argmax(sims))  # argmax returns first max: lowest index
        edges.add((sent.index, best + 1))

    return AlignmentGraph(summary_id=summary.id, novel_id=novel.id,
                          n_sentences=summary.n_sentences, n_chapters=n,
                          edges=frozenset(edges), method="tfidf",
                          diagnostics=tuple(diagnostics))


def align_embedding(summary: Summary, novel: Novel,
                    table: EmbeddingTable) -> AlignmentGraph:
    """One edge per sentence to the argmax-cosine chapter by embedding."""
    chapter_vecs = []
    for ch in novel.chapters:
        unit = chapter_unit_id(novel.id, ch.index)
        if unit not in table.vectors:
            raise AlignmentError(f"missing embedding for {unit!r}")
        chapter_vecs.append(table.vectors[unit])

    edges = set()
    for sent in summary.sentences:
        unit = sentence_unit_id(summary.id, sent.index)
        if unit not in table.vectors:
            raise AlignmentError(f"missing embedding for {unit!r}")
        svec = table.vectors[unit]
        sims = [_cosine(svec, cvec) for cvec in chapter_vecs]
        edges.add((sent.index, int(np.argmax(sims)) + 1))

    return AlignmentGraph(summary_id=summary.id, novel_id=novel.id,
                          n_sentences=summary.n_sentences,
                          n_chapters=novel.n_chapters,
                          edges=frozenset(edges), method="embedding")
