"""Distribution comparison machinery: two-sample Kolmogorov-Smirnov,
Benjamini-Hochberg correction, means with standard errors, and the
book/model/prompt aggregation convention used by the report tables.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass


@dataclass(frozen=True)
class ComparisonReport:
    metric_name: str
    group_a: str
    group_b: str
    ks_distance: float
    p_value: float
    significant: bool
    n_a: int
    n_b: int


@dataclass(frozen=True)
class AggregateCell:
    group: str
    metric_name: str
    mean: float
    se: float
    n_books: int


def ks_statistic(a: list[float], b: list[float]) -> float:
    """Exact sup |F_a - F_b| over empirical CDFs via a sorted-merge sweep."""
    if not a or not b:
        raise ValueError("samples must be non-empty")
    sa, sb = sorted(a), sorted(b)
    na, nb = len(sa), len(sb)
    i = j = 0
    d = 0.0
    while i < na and j < nb:
        x = min(sa[i], sb[j])
        while i < na and sa[i] <= x:
            i += 1
        while j < nb and sb[j] <= x:
            j += 1
        d = max(d, abs(i / na - j / nb))
    return d


def ks_pvalue(d: float, n: int, m: int) -> float:
    """Asymptotic two-sample p-value for KS distance *d*.

    With e = sqrt(nm/(n+m)) * d, p = 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 e^2),
    truncated when terms drop below 1e-12, clamped to [0, 1].
    """
    if not 0 <= d <= 1:
        raise ValueError("D must be in [0, 1]")
    if n < 1 or m < 1:
        raise ValueError("sample sizes must be >= 1")
    e = math.sqrt(n * m / (n + m)) * d
    if e == 0:
        return 1.0
    total = 0.0
    for k in range(1, 100_000):
        term = math.exp(-2 * k * k * e * e)
        total += term if k % 2 == 1 else -term
        if term < 1e-12:
            break
    return min(max(2 * total, 0.0), 1.0)


def bh_adjust(pvalues: list[float], alpha: float) -> list[bool]:
    """Benjamini-Hochberg step-up: reject the smallest k hypotheses where
    p_(k) <= (k/m) * alpha, decisions mapped back to input order."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    m = len(pvalues)
    if m == 0:
        return []
    for p in pvalues:
        if not 0 <= p <= 1:
            raise ValueError(f"p-value {p} outside [0, 1]")
    order = sorted(range(m), key=lambda i: pvalues[i])
    k_max = 0
    for rank, idx in enumerate(order, start=1):
        if pvalues[idx] <= rank / m * alpha:
            k_max = rank
    decisions = [False] * m
    for idx in order[:k_max]:
        decisions[idx] = True
    return decisions


def mean_se(values: list[float]) -> tuple[float, float]:
    """Mean and standard error (sample sd with n-1 denominator over sqrt n)."""
    n = len(values)
    if n < 1:
        raise ValueError("need at least one value")
    mean = sum(values) / n
    if n == 1:
        return (mean, 0.0)
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return (mean, math.sqrt(var) / math.sqrt(n))


# ---------------------------------------------------------------------------
# Aggregation: averaged by book, then separately by model and by prompt
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricRecord:
    book: str
    value: float
    model: str | None = None    # None for human rows
    prompt: str | None = None


def aggregate(records: list[MetricRecord], metric: str,
              within_book_first: bool = True) -> list[AggregateCell]:
    """Model cells average the prompt values within each book first, then take
    mean/se across books (and symmetrically for prompt cells). Human records
    aggregate directly across books. Set within_book_first=False for flat
    averaging across all records of a group."""
    cells = []

    human_values = [r.value for r in records if r.model is None]
    if human_values:
        mean, se = mean_se(human_values)
        cells.append(AggregateCell("human", metric, mean, se, len(human_values)))

    model_records = [r for r in records if r.model is not None]

    for axis in ("model", "prompt"):
        groups: dict[str, list[MetricRecord]] = defaultdict(list)
        for r in model_records:
            groups[getattr(r, axis)].append(r)
        for group_name in sorted(groups):
            rs = groups[group_name]
            if within_book_first:
                per_book: dict[str, list[float]] = defaultdict(list)
                for r in rs:
                    per_book[r.book].append(r.value)
                values = [sum(v) / len(v) for v in per_book.values()]
            else:
                values = [r.value for r in rs]
            mean, se = mean_se(values)
            cells.append(AggregateCell(f"{axis}:{group_name}", metric,
                                       mean, se, len(values)))
    return cells


def compare_to_human(samples_by_group: dict[str, list[float]],
                     human: list[float], metric: str,
                     alpha: float = 0.01) -> list[ComparisonReport]:
    """KS distance of each group against the human sample, with BH-adjusted
    significance across the whole family of tests."""
    groups = sorted(samples_by_group)
    stats = []
    for g in groups:
        sample = samples_by_group[g]
        d = ks_statistic(sample, human)
        p = ks_pvalue(d, len(sample), len(human))
        stats.append((g, d, p, len(sample)))
    decisions = bh_adjust([p for _, _, p, _ in stats], alpha)
    return [ComparisonReport(metric_name=metric, group_a=g, group_b="human",
                             ks_distance=d, p_value=p, significant=sig,
                             n_a=n, n_b=len(human))
            for (g, d, p, n), sig in zip(stats, decisions)]
