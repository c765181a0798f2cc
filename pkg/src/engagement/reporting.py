"""CSV/Markdown table emission and heatmap rendering."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from PIL import Image

from .engagement_metrics import HeatmapMatrix
from .stats import AggregateCell, ComparisonReport


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_metrics_csv(path: Path, rows: list[dict], columns: list[str]):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({c: _fmt(row.get(c)) for c in columns})


def write_evaluation_csv(path: Path, rows: list[dict]):
    """Table-1-style report: per-novel P/R/F1 plus a pooled row and macro column."""
    columns = ["method", "novel", "precision", "recall", "f1", "macro_f1"]
    write_metrics_csv(path, rows, columns)


def write_comparison_csv(path: Path, reports: list[ComparisonReport]):
    columns = ["metric", "group", "ks_distance", "p_value", "significant",
               "n_group", "n_human"]
    rows = [{"metric": r.metric_name, "group": r.group_a,
             "ks_distance": r.ks_distance, "p_value": r.p_value,
             "significant": r.significant, "n_group": r.n_a, "n_human": r.n_b}
            for r in reports]
    write_metrics_csv(path, rows, columns)


def write_aggregate_csv(path: Path, cells: list[AggregateCell]):
    """Wide layout mirroring the report tables: rows are groups, columns metrics,
    cells formatted 'mean [± se]'."""
    metrics = sorted({c.metric_name for c in cells})
    groups: list[str] = []
    for c in cells:
        if c.group not in groups:
            groups.append(c.group)
    lookup = {(c.group, c.metric_name): c for c in cells}
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["group"] + metrics)
        for g in groups:
            row = [g]
            for m in metrics:
                c = lookup.get((g, m))
                row.append(f"{c.mean:.4g} [± {c.se:.2g}]" if c else "")
            writer.writerow(row)


def aggregate_markdown(cells: list[AggregateCell]) -> str:
    """Markdown rendering with the 'mean [± se]' cell format for visual diffing."""
    metrics = sorted({c.metric_name for c in cells})
    groups: list[str] = []
    for c in cells:
        if c.group not in groups:
            groups.append(c.group)
    lookup = {(c.group, c.metric_name): c for c in cells}
    lines = ["| group | " + " | ".join(metrics) + " |",
             "|" + "---|" * (len(metrics) + 1)]
    for g in groups:
        cells_fmt = []
        for m in metrics:
            c = lookup.get((g, m))
            cells_fmt.append(f"{c.mean:.4g} [± {c.se:.2g}]" if c else "")
        lines.append(f"| {g} | " + " | ".join(cells_fmt) + " |")
    return "\n".join(lines) + "\n"


def write_heatmap_csv(path: Path, matrix: HeatmapMatrix):
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["book"] + [f"bin_{i + 1}" for i in range(matrix.n_bins)])
        for book, row in zip(matrix.book_ids, matrix.rows):
            writer.writerow([book] + [f"{v:.10g}" for v in row])


def render_heatmap(matrix: HeatmapMatrix, path: Path, cell_px: int = 16):
    """Grayscale grid, one row per book, darker = more mass.

    Fixed linear mapping per row: 0 -> white, row max -> black, so the output
    is deterministic and library-agnostic.
    """
    n_rows = max(len(matrix.book_ids), 1)
    pixels = np.full((n_rows, matrix.n_bins), 255, dtype=np.uint8)
    for i, row in enumerate(matrix.rows):
        row_max = row.max()
        if row_max > 0:
            pixels[i] = np.round(255 * (1 - row / row_max)).astype(np.uint8)
    img = Image.fromarray(pixels, mode="L")
    img = img.resize((matrix.n_bins * cell_px, n_rows * cell_px),
                     Image.Resampling.NEAREST)
    img.save(Path(path), format="PNG")
