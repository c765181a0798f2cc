"""Conceptual-engagement metrics over alignment graphs.

All metrics treat the graph as a bipartite edge set between summary sentence
indices and chapter indices. Undefined values (too few edges, zero variance)
come back as None and are reported as missing downstream.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .aligner import AlignmentGraph


@dataclass(frozen=True)
class EngagementMetrics:
    summary_id: str
    chapters_per_sentence: float | None
    sentences_per_chapter: float | None
    prop_chapters_skipped: float
    prop_sentences_skipped: float
    linearity: float | None
    skew: float | None
    avg_match: float | None

    FIELDS = ("chapters_per_sentence", "sentences_per_chapter",
              "prop_chapters_skipped", "prop_sentences_skipped",
              "linearity", "skew", "avg_match")


def kendall_tau_b(x: list, y: list) -> float | None:
    """Tie-corrected Kendall rank correlation (tau-b).

    Vectorized pairwise formulation; None when either sequence is constant
    (denominator 0) or has fewer than 2 elements.
    """
    n = len(x)
    if n != len(y):
        raise ValueError("sequences must have equal length")
    if n < 2:
        return None
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    dx = np.sign(xa[:, None] - xa[None, :])
    dy = np.sign(ya[:, None] - ya[None, :])
    iu = np.triu_indices(n, k=1)
    prod = dx[iu] * dy[iu]
    concordant = int(np.sum(prod > 0))
    discordant = int(np.sum(prod < 0))
    ties_x = int(np.sum(dx[iu] == 0))
    ties_y = int(np.sum(dy[iu] == 0))
    n0 = n * (n - 1) // 2
    denom = np.sqrt(float(n0 - ties_x)) * np.sqrt(float(n0 - ties_y))
    if denom == 0:
        return None
    return (concordant - discordant) / denom


def _sentence_degrees(g: AlignmentGraph) -> dict[int, int]:
    deg: dict[int, int] = defaultdict(int)
    for s, _ in g.edges:
        deg[s] += 1
    return deg


def _chapter_degrees(g: AlignmentGraph) -> dict[int, int]:
    deg: dict[int, int] = defaultdict(int)
    for _, c in g.edges:
        deg[c] += 1
    return deg


def chapters_per_sentence(g: AlignmentGraph) -> float | None:
    """Mean degree over sentences with at least one edge."""
    deg = _sentence_degrees(g)
    if not deg:
        return None
    return sum(deg.values()) / len(deg)


def sentences_per_chapter(g: AlignmentGraph) -> float | None:
    """Mean degree over chapters with at least one edge."""
    deg = _chapter_degrees(g)
    if not deg:
        return None
    return sum(deg.values()) / len(deg)


def prop_skipped(g: AlignmentGraph) -> tuple[float, float]:
    """(fraction of chapters with degree 0, fraction of sentences with degree 0)."""
    matched_chapters = {c for _, c in g.edges}
    matched_sentences = {s for s, _ in g.edges}
    return (1 - len(matched_chapters) / g.n_chapters,
            1 - len(matched_sentences) / g.n_sentences)


def match_sequence(g: AlignmentGraph) -> list[int]:
    """Concatenate, per chapter in index order, its sorted matched sentence ids."""
    by_chapter: dict[int, list[int]] = defaultdict(list)
    for s, c in g.edges:
        by_chapter[c].append(s)
    seq: list[int] = []
    for c in sorted(by_chapter):
        seq.extend(sorted(by_chapter[c]))
    return seq


def linearity(g: AlignmentGraph) -> float | None:
    """Kendall tau-b between the chapter-ordered match sequence and its sorted copy."""
    if len(g.edges) < 2:
        return None
    seq = match_sequence(g)
    return kendall_tau_b(seq, sorted(seq))


def _positions(g: AlignmentGraph) -> np.ndarray:
    """Normalized chapter positions, one sample per edge: c / n."""
    return np.array([c / g.n_chapters for _, c in g.edges] or [], dtype=float)


def skew(g: AlignmentGraph) -> float | None:
    """Fisher-Pearson moment skewness g1 of the edge-position multiset.

    Negative when alignment mass concentrates in the later half of the novel.
    None with fewer than 3 edges or zero variance.
    """
    x = _positions(g)
    if len(x) < 3:
        return None
    m = x.mean()
    m2 = float(np.mean((x - m) ** 2))
    if m2 == 0:
        return None
    m3 = float(np.mean((x - m) ** 3))
    return m3 / m2 ** 1.5


def avg_match(g: AlignmentGraph) -> float | None:
    """Mean normalized chapter position over edges."""
    x = _positions(g)
    if len(x) == 0:
        return None
    return float(x.mean())


def compute_engagement(g: AlignmentGraph) -> EngagementMetrics:
    ch_skip, sent_skip = prop_skipped(g)
    return EngagementMetrics(
        summary_id=g.summary_id,
        chapters_per_sentence=chapters_per_sentence(g),
        sentences_per_chapter=sentences_per_chapter(g),
        prop_chapters_skipped=ch_skip,
        prop_sentences_skipped=sent_skip,
        linearity=linearity(g),
        skew=skew(g),
        avg_match=avg_match(g),
    )


# ---------------------------------------------------------------------------
# Heatmaps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HeatmapMatrix:
    book_ids: tuple[str, ...]
    n_bins: int
    rows: np.ndarray                  # one normalized row per book
    empty_books: tuple[str, ...] = ()

    def __post_init__(self):
        if self.rows.shape != (len(self.book_ids), self.n_bins):
            raise ValueError("heatmap shape mismatch")


def position_bin(chapter: int, n_chapters: int, n_bins: int) -> int:
    """0-based bin of chapter position i/n under ceil((i/n) * n_bins)."""
    b = int(np.ceil(chapter / n_chapters * n_bins))
    return min(max(b, 1), n_bins) - 1


def heatmap(graphs: list[AlignmentGraph], n_bins: int = 20) -> HeatmapMatrix:
    """Per-book histogram of normalized edge positions, each row summing to 1.

    Graphs sharing a novel_id pool their edges into one row. Books with zero
    edges produce an all-zero row and are flagged in empty_books.
    """
    if n_bins < 1:
        raise ValueError("n_bins must be >= 1")
    per_book: dict[str, np.ndarray] = {}
    order: list[str] = []
    for g in graphs:
        if g.novel_id not in per_book:
            per_book[g.novel_id] = np.zeros(n_bins)
            order.append(g.novel_id)
        row = per_book[g.novel_id]
        for _, c in g.edges:
            row[position_bin(c, g.n_chapters, n_bins)] += 1

    rows = np.zeros((len(order), n_bins))
    empty = []
    for i, book in enumerate(order):
        total = per_book[book].sum()
        if total > 0:
            rows[i] = per_book[book] / total
        else:
            empty.append(book)
    return HeatmapMatrix(book_ids=tuple(order), n_bins=n_bins, rows=rows,
                         empty_books=tuple(empty))
