"""Score predicted alignment graphs against gold annotations.

Gold files use the AlignmentGraph JSON schema with method="gold" plus an
"annotator" field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .aligner import AlignmentGraph


class EvalError(Exception):
    pass


@dataclass(frozen=True)
class GoldAlignment:
    novel_id: str
    summary_id: str
    annotator: str
    n_sentences: int
    n_chapters: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for s, c in self.edges:
            if not (1 <= s <= self.n_sentences and 1 <= c <= self.n_chapters):
                raise EvalError(f"gold edge ({s},{c}) out of bounds")

    @classmethod
    def load(cls, path: Path) -> "GoldAlignment":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if data.get("method") != "gold":
            raise EvalError(f"{path}: not a gold alignment file")
        return cls(novel_id=data["novel_id"], summary_id=data["summary_id"],
                   annotator=data["annotator"],
                   n_sentences=data["n_sentences"], n_chapters=data["n_chapters"],
                   edges=frozenset((s, c) for s, c in data["edges"]))

    def save(self, path: Path):
        Path(path).write_text(json.dumps({
            "summary_id": self.summary_id,
            "novel_id": self.novel_id,
            "n_sentences": self.n_sentences,
            "n_chapters": self.n_chapters,
            "method": "gold",
            "annotator": self.annotator,
            "edges": [list(e) for e in sorted(self.edges)],
        }, indent=2), encoding="utf-8")


def _check_same_pair(a, b):
    if (a.summary_id, a.novel_id) != (b.summary_id, b.novel_id):
        raise EvalError(
            f"mismatched ids: ({a.summary_id},{a.novel_id}) vs ({b.summary_id},{b.novel_id})")


def prf1(pred: AlignmentGraph, gold: GoldAlignment) -> tuple[float, float, float]:
    """Precision/recall/F1 over (sentence, chapter) pairs, on the 0-100 scale.

    An empty prediction has precision 0 by convention; F1 is 0 when
    precision + recall is 0.
    """
    _check_same_pair(pred, gold)
    hits = len(pred.edges & gold.edges)
    precision = hits / len(pred.edges) if pred.edges else 0.0
    recall = hits / len(gold.edges) if gold.edges else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall > 0 else 0.0)
    return (100 * precision, 100 * recall, 100 * f1)


def pooled_prf1(pairs: list[tuple[AlignmentGraph, GoldAlignment]]
                ) -> tuple[float, float, float]:
    """Micro-averaged P/R/F1: intersection and set sizes pooled across texts."""
    hits = n_pred = n_gold = 0
    for pred, gold in pairs:
        _check_same_pair(pred, gold)
        hits += len(pred.edges & gold.edges)
        n_pred += len(pred.edges)
        n_gold += len(gold.edges)
    precision = hits / n_pred if n_pred else 0.0
    recall = hits / n_gold if n_gold else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall > 0 else 0.0)
    return (100 * precision, 100 * recall, 100 * f1)


def cohen_kappa(a: GoldAlignment, b: GoldAlignment) -> tuple[float, bool]:
    """Cohen's kappa over the |S| x n grid of binary cells.

    Returns (kappa, degenerate). The degenerate case p_e = 1 (both annotators
    uniform) is defined as 1.0 when the annotations agree everywhere, else 0.0.
    """
    _check_same_pair(a, b)
    if (a.n_sentences, a.n_chapters) != (b.n_sentences, b.n_chapters):
        raise EvalError("annotations have different index bounds")
    total = a.n_sentences * a.n_chapters
    if total == 0:
        raise EvalError("empty annotation grid")

    agree = total - len(a.edges ^ b.edges)
    p_o = agree / total
    pa, pb = len(a.edges) / total, len(b.edges) / total
    p_e = pa * pb + (1 - pa) * (1 - pb)
    if p_e == 1.0:
        return (1.0 if a.edges == b.edges else 0.0, True)
    return ((p_o - p_e) / (1 - p_e), False)


def adjudicate(a: GoldAlignment, b: GoldAlignment,
               resolutions: list[tuple[tuple[int, int], str]]) -> GoldAlignment:
    """Merge two annotations; resolutions must cover exactly the disagreements."""
    _check_same_pair(a, b)
    disagreements = a.edges ^ b.edges
    resolved_cells = {cell for cell, _ in resolutions}
    if resolved_cells != disagreements:
        missing = disagreements - resolved_cells
        spurious = resolved_cells - disagreements
        raise EvalError(
            f"resolutions must cover exactly the disagreeing cells "
            f"(missing={sorted(missing)}, spurious={sorted(spurious)})")

    edges = set(a.edges & b.edges)
    for cell, label in resolutions:
        if label.upper() == "YES":
            edges.add(cell)
        elif label.upper() != "NO":
            raise EvalError(f"resolution label must be YES/NO, got {label!r}")
    return GoldAlignment(novel_id=a.novel_id, summary_id=a.summary_id,
                         annotator="adjudicated",
                         n_sentences=a.n_sentences, n_chapters=a.n_chapters,
                         edges=frozenset(edges))
