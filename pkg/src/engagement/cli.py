"""Command-line orchestration: ``ea ingest|generate|align|evaluate|metrics|report``.

Exit codes: 0 success, 1 validation error, 2 fixture miss, 3 provider error.
Every command writes a manifest (run id, config hash, produced files with
content hashes, stage timings) and skips outputs whose content is unchanged.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import align_eval, aligner, engagement_metrics, reporting, stats, style_metrics
from .corpus import CorpusError, Novel, Summary, load_corpus
from .gateway import (ChatRequest, FixtureMissError, GatewayError, Transport,
                      complete)
from .prompts import PromptError, render_generation_prompt

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_FIXTURE_MISS = 2
EXIT_PROVIDER = 3


def _sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass
class RunConfig:
    corpus_root: Path
    output_root: Path
    aligner: dict = field(default_factory=dict)
    generators: list = field(default_factory=list)
    transport: dict = field(default_factory=dict)
    prompts: list = field(default_factory=lambda: ["Text", "TextInst", "Title", "TitleInst"])
    alpha: float = 0.01
    heatmap_bins: int = 20
    seed: int = 0
    guidelines: str = ""
    workers: int = 1

    @classmethod
    def from_file(cls, path: Path) -> "RunConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not 0 < data.get("alpha", 0.01) < 1:
            raise CorpusError("alpha must be in (0, 1)")
        return cls(
            corpus_root=Path(data["corpus_root"]),
            output_root=Path(data["output_root"]),
            aligner=data.get("aligner", {}),
            generators=data.get("generators", []),
            transport=data.get("transport", {}),
            prompts=data.get("prompts", ["Text", "TextInst", "Title", "TitleInst"]),
            alpha=data.get("alpha", 0.01),
            heatmap_bins=data.get("heatmap_bins", 20),
            seed=data.get("seed", 0),
            guidelines=data.get("guidelines", ""),
        )

    def config_hash(self) -> str:
        payload = {k: str(v) for k, v in vars(self).items()}
        return _sha256_bytes(json.dumps(payload, sort_keys=True).encode())[:16]

    def make_transport(self) -> Transport:
        t = dict(self.transport)
        return Transport(
            mode=t.get("mode", "replay"),
            endpoint=t.get("endpoint", ""),
            fixture_dir=Path(t["fixture_dir"]) if t.get("fixture_dir") else None,
            provider=t.get("provider", self.aligner.get("provider", "openai")),
            max_retries=int(self.aligner.get("max_retries", 3)),
            rpm=self.aligner.get("rpm"),
        )

    def make_aligner_config(self) -> aligner.AlignerConfig:
        return aligner.AlignerConfig(
            model=self.aligner.get("model", "gpt-oss-120b"),
            temperature=float(self.aligner.get("temperature", 0.0)),
            max_output_tokens=int(self.aligner.get("max_output_tokens", 2048)),
            context_budget_tokens=self.aligner.get("context_budget_tokens"),
        )


class ManifestWriter:
    """Tracks produced files and timings; skips byte-identical rewrites."""

    def __init__(self, config: RunConfig, command: str):
        self.command = command
        self.config_hash = config.config_hash()
        self.run_id = f"{command}-{self.config_hash}"
        self.produced: list[dict] = []
        self.timings: dict[str, float] = {}
        self.output_root = config.output_root

    def write(self, path: Path, data: bytes) -> bool:
        """Write atomically unless the file already holds identical bytes.
        Returns True when the file was (re)written."""
        path = Path(path)
        digest = _sha256_bytes(data)
        wrote = True
        if path.is_file() and _sha256_bytes(path.read_bytes()) == digest:
            wrote = False
        else:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_name(path.name + ".tmp")
            tmp.write_bytes(data)
            tmp.replace(path)
        self.produced.append({"path": str(path), "content_hash": digest,
                              "written": wrote})
        return wrote

    def record_existing(self, path: Path):
        self.produced.append({"path": str(path),
                              "content_hash": _sha256_bytes(Path(path).read_bytes()),
                              "written": True})

    def finish(self) -> Path:
        manifest = {"run_id": self.run_id, "config_hash": self.config_hash,
                    "produced_files": self.produced, "timings": self.timings}
        path = self.output_root / f"{self.command}_manifest.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
        return path


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_ingest(config: RunConfig, args) -> int:
    manifest = ManifestWriter(config, "ingest")
    t0 = time.monotonic()
    novels, summaries = load_corpus(config.corpus_root)
    manifest.timings["load"] = time.monotonic() - t0

    listing = {
        "n_novels": len(novels),
        "n_summaries": len(summaries),
        "novels": [{"id": n.id, "title": n.title, "n_chapters": n.n_chapters,
                    "headings": [c.heading for c in n.chapters if c.heading]}
                   for n in novels],
        "summaries": [{"id": s.id, "novel_id": s.novel_id,
                       "author_kind": s.author_kind,
                       "n_sentences": s.n_sentences} for s in summaries],
    }
    manifest.write(config.output_root / "corpus_listing.json",
                   json.dumps(listing, indent=2).encode())
    manifest.finish()
    print(f"ingested {len(novels)} novels, {len(summaries)} summaries")
    return EXIT_OK


def _summary_filename(novel_id: str, model: str, variant: str) -> str:
    safe_model = model.replace("/", "-")
    return f"{novel_id}__{safe_model}__{variant}.json"


def cmd_generate(config: RunConfig, args) -> int:
    novels, _ = load_corpus(config.corpus_root)
    transport = config.make_transport()
    models = args.models.split(",") if args.models else \
        [g["model"] for g in config.generators]
    prompts = args.prompts.split(",") if args.prompts else config.prompts

    plan = [(m, n, v) for m in models for n in novels for v in prompts]
    if args.dry_run:
        print(f"planned requests: {len(plan)}")
        return EXIT_OK

    gen_by_model = {g["model"]: g for g in config.generators}
    manifest = ManifestWriter(config, "generate")
    failures = []
    t0 = time.monotonic()
    for model, novel, variant in plan:
        gen = gen_by_model.get(model, {})
        prompt = render_generation_prompt(variant, novel,
                                          guidelines=config.guidelines or None)
        req = ChatRequest(model=model, prompt=prompt,
                          temperature=float(gen.get("temperature", 0.7)),
                          max_output_tokens=int(gen.get("max_output_tokens", 4096)))
        try:
            response = complete(req, transport)
        except FixtureMissError as e:
            failures.append(str(e))
            continue
        record = {"novel_id": novel.id, "author_kind": "model",
                  "model_name": model, "prompt_variant": variant,
                  "raw_text": response.text}
        out = config.output_root / "summaries" / _summary_filename(novel.id, model, variant)
        manifest.write(out, json.dumps(record, indent=2, ensure_ascii=False).encode())
    manifest.timings["generate"] = time.monotonic() - t0
    manifest.finish()
    if failures:
        for f in failures:
            print(f"FAILED: {f}", file=sys.stderr)
        return EXIT_FIXTURE_MISS
    print(f"generated {len(plan)} summaries")
    return EXIT_OK


def cmd_align(config: RunConfig, args) -> int:
    if args.method not in ("llm", "tfidf", "embedding"):
        print(f"unknown method {args.method!r} (expected llm|tfidf|embedding)",
              file=sys.stderr)
        return EXIT_VALIDATION

    novels, summaries = load_corpus(config.corpus_root)
    novel_by_id = {n.id: n for n in novels}
    manifest = ManifestWriter(config, "align")
    graph_dir = config.output_root / "graphs" / args.method

    table = None
    if args.method == "embedding":
        if not args.embeddings:
            print("--embeddings <file> required for method=embedding", file=sys.stderr)
            return EXIT_VALIDATION
        table = aligner.EmbeddingTable.load(Path(args.embeddings))

    transport = config.make_transport()
    aligner_config = config.make_aligner_config()

    def build(summary: Summary) -> aligner.AlignmentGraph:
        novel = novel_by_id[summary.novel_id]
        if args.method == "tfidf":
            return aligner.align_tfidf(summary, novel)
        if args.method == "embedding":
            return aligner.align_embedding(summary, novel, table)
        return aligner.align_llm(summary, novel, transport, aligner_config)

    t0 = time.monotonic()
    workers = max(args.workers or 1, 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            graphs = list(pool.map(build, summaries))
    else:
        graphs = [build(s) for s in summaries]
    manifest.timings["align"] = time.monotonic() - t0

    for g in graphs:
        manifest.write(graph_dir / f"{g.summary_id}.json",
                       json.dumps(g.to_dict(), indent=2).encode())
    manifest.finish()
    print(f"aligned {len(graphs)} summaries with method={args.method}")
    return EXIT_OK


def _load_gold_files(config: RunConfig) -> list[align_eval.GoldAlignment]:
    gold_dir = config.corpus_root / "gold"
    if not gold_dir.is_dir():
        return []
    return [align_eval.GoldAlignment.load(f) for f in sorted(gold_dir.glob("*.json"))]


def cmd_evaluate(config: RunConfig, args) -> int:
    golds = _load_gold_files(config)
    if not golds:
        print("no gold alignments found; skipping evaluation")
        return EXIT_OK

    method = args.method or "llm"
    manifest = ManifestWriter(config, "evaluate")
    rows = []
    pairs = []
    per_novel_f1 = []
    for gold in golds:
        if method == "gold":
            pred = aligner.AlignmentGraph(
                summary_id=gold.summary_id, novel_id=gold.novel_id,
                n_sentences=gold.n_sentences, n_chapters=gold.n_chapters,
                edges=gold.edges, method="gold")
        else:
            graph_path = (config.output_root / "graphs" / method /
                          f"{gold.summary_id}.json")
            if not graph_path.is_file():
                print(f"skip: no {method} graph for {gold.summary_id}")
                continue
            pred = aligner.AlignmentGraph.load(graph_path)
        p, r, f1 = align_eval.prf1(pred, gold)
        rows.append({"method": method, "novel": gold.novel_id,
                     "precision": p, "recall": r, "f1": f1, "macro_f1": None})
        pairs.append((pred, gold))
        per_novel_f1.append(f1)

    if pairs:
        p, r, f1 = align_eval.pooled_prf1(pairs)
        rows.append({"method": method, "novel": "POOLED", "precision": p,
                     "recall": r, "f1": f1,
                     "macro_f1": sum(per_novel_f1) / len(per_novel_f1)})

    report_path = config.output_root / f"evaluation_{method}.csv"
    report_path.parent.mkdir(parents=True, exist_ok=True)
    reporting.write_evaluation_csv(report_path, rows)
    manifest.record_existing(report_path)
    manifest.finish()
    if pairs:
        print(f"evaluation ({method}): pooled F1 = {f1:.1f}")
    return EXIT_OK


def _load_annotations_for(config: RunConfig, summary_id: str):
    path = config.corpus_root / "annotations" / f"{summary_id}.ann.json"
    if path.is_file():
        return style_metrics.load_annotations(path)
    return None


def cmd_metrics(config: RunConfig, args) -> int:
    novels, summaries = load_corpus(config.corpus_root)
    method = args.method or "llm"
    graph_dir = config.output_root / "graphs" / method
    manifest = ManifestWriter(config, "metrics")

    human_by_novel = {s.novel_id: s for s in summaries if s.author_kind == "human"}

    metric_rows = []
    graphs = []
    records: dict[str, list[stats.MetricRecord]] = {
        m: [] for m in engagement_metrics.EngagementMetrics.FIELDS +
        style_metrics.StyleMetrics.FIELDS}

    for summary in summaries:
        graph_path = graph_dir / f"{summary.id}.json"
        graph = aligner.AlignmentGraph.load(graph_path) if graph_path.is_file() else None
        if graph:
            graphs.append(graph)

        annotations = _load_annotations_for(config, summary.id)
        reference = None
        if summary.author_kind == "model" and summary.novel_id in human_by_novel:
            reference = human_by_novel[summary.novel_id].text()
        style = style_metrics.compute_style(summary, annotations, reference)
        engagement = engagement_metrics.compute_engagement(graph) if graph else None

        row = {"summary_id": summary.id, "novel_id": summary.novel_id,
               "author_kind": summary.author_kind,
               "model_name": summary.model_name,
               "prompt_variant": summary.prompt_variant}
        for f in style_metrics.StyleMetrics.FIELDS:
            row[f] = getattr(style, f)
        for f in engagement_metrics.EngagementMetrics.FIELDS:
            row[f] = getattr(engagement, f) if engagement else None
        metric_rows.append(row)

        model = summary.model_name
        prompt = summary.prompt_variant
        for f in records:
            v = row.get(f)
            if v is not None:
                records[f].append(stats.MetricRecord(
                    book=summary.novel_id, value=float(v),
                    model=model, prompt=prompt))

    columns = (["summary_id", "novel_id", "author_kind", "model_name",
                "prompt_variant"] + list(style_metrics.StyleMetrics.FIELDS) +
               list(engagement_metrics.EngagementMetrics.FIELDS))
    out = config.output_root
    out.mkdir(parents=True, exist_ok=True)
    reporting.write_metrics_csv(out / "metrics.csv", metric_rows, columns)
    manifest.record_existing(out / "metrics.csv")

    cells = []
    for metric, recs in records.items():
        if recs:
            cells.extend(stats.aggregate(recs, metric))
    reporting.write_aggregate_csv(out / "aggregates.csv", cells)
    (out / "aggregates.json").write_text(json.dumps(
        [vars(c) for c in cells], indent=2), encoding="utf-8")
    manifest.record_existing(out / "aggregates.csv")

    # KS comparisons of each (model, prompt) group against humans
    comparisons = []
    for metric, recs in records.items():
        human = [r.value for r in recs if r.model is None]
        groups: dict[str, list[float]] = {}
        for r in recs:
            if r.model is not None:
                groups.setdefault(f"{r.model}/{r.prompt}", []).append(r.value)
        if human and groups:
            comparisons.extend(stats.compare_to_human(groups, human, metric,
                                                      alpha=config.alpha))
    if comparisons:
        reporting.write_comparison_csv(out / "comparisons.csv", comparisons)
        manifest.record_existing(out / "comparisons.csv")

    bins = args.bins or config.heatmap_bins
    matrix = engagement_metrics.heatmap(graphs, n_bins=bins)
    reporting.write_heatmap_csv(out / "heatmap.csv", matrix)
    manifest.record_existing(out / "heatmap.csv")

    manifest.finish()
    print(f"metrics written for {len(metric_rows)} summaries "
          f"({len(graphs)} with {method} graphs)")
    return EXIT_OK


def cmd_report(config: RunConfig, args) -> int:
    out = config.output_root
    manifest = ManifestWriter(config, "report")

    agg_path = out / "aggregates.json"
    if agg_path.is_file():
        cells = [stats.AggregateCell(**c) for c in json.loads(agg_path.read_text())]
        md = reporting.aggregate_markdown(cells)
        manifest.write(out / "tables.md", md.encode())

    heatmap_csv = out / "heatmap.csv"
    if heatmap_csv.is_file():
        import csv as _csv
        import numpy as np
        with open(heatmap_csv, newline="", encoding="utf-8") as f:
            reader = list(_csv.reader(f))
        books = [r[0] for r in reader[1:]]
        rows = np.array([[float(v) for v in r[1:]] for r in reader[1:]])
        matrix = engagement_metrics.HeatmapMatrix(
            book_ids=tuple(books), n_bins=rows.shape[1] if len(rows) else 0,
            rows=rows)
        reporting.render_heatmap(matrix, out / "heatmap.png")
        manifest.record_existing(out / "heatmap.png")

    manifest.finish()
    print("report written")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ea",
                                     description="narrative engagement toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("ingest", "generate", "align", "evaluate", "metrics", "report"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--method", default=None)
        p.add_argument("--models", default=None)
        p.add_argument("--prompts", default=None)
        p.add_argument("--embeddings", default=None)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--bins", type=int, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--dry-run", action="store_true")
        mode = p.add_mutually_exclusive_group()
        mode.add_argument("--replay", action="store_true")
        mode.add_argument("--record", action="store_true")
        mode.add_argument("--live", action="store_true")
    return parser


COMMANDS = {
    "ingest": cmd_ingest,
    "generate": cmd_generate,
    "align": cmd_align,
    "evaluate": cmd_evaluate,
    "metrics": cmd_metrics,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.from_file(Path(args.config))
    except (OSError, KeyError, json.JSONDecodeError, CorpusError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_VALIDATION

    for mode in ("replay", "record", "live"):
        if getattr(args, mode):
            config.transport["mode"] = mode
    if args.alpha is not None:
        config.alpha = args.alpha

    try:
        return COMMANDS[args.command](config, args)
    except FixtureMissError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FIXTURE_MISS
    except GatewayError as e:
        print(f"provider error: {e}", file=sys.stderr)
        return EXIT_PROVIDER
    except (CorpusError, align_eval.EvalError, aligner.AlignmentError,
            style_metrics.AnnotationError, PromptError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
