import csv
import json
import shutil

import numpy as np
import pytest
from PIL import Image

from engagement.cli import main
from engagement.engagement_metrics import HeatmapMatrix
from engagement.reporting import render_heatmap
from conftest import FIXTURES


@pytest.fixture()
def run(tmp_path):
    """Return a helper that invokes the CLI against the fixture corpus."""
    out = tmp_path / "out"
    config = {
        "corpus_root": str(FIXTURES / "corpus"),
        "output_root": str(out),
        "aligner": {"model": "gpt-oss-120b", "temperature": 0.0},
        "transport": {"mode": "replay", "fixture_dir": str(FIXTURES / "llm")},
        "alpha": 0.01,
        "heatmap_bins": 10,
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")

    def invoke(*argv):
        return main([argv[0], "--config", str(config_path), *argv[1:]])

    invoke.out = out
    invoke.config_path = config_path
    invoke.config = config
    return invoke


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


class TestIngest:
    def test_listing_and_manifest(self, run, capsys):
        assert run("ingest") == 0
        listing = json.loads((run.out / "corpus_listing.json").read_text())
        assert listing["n_novels"] == 1
        assert listing["n_summaries"] == 1
        assert listing["novels"][0]["n_chapters"] == 17
        manifest = json.loads((run.out / "ingest_manifest.json").read_text())
        assert manifest["produced_files"][0]["path"].endswith("corpus_listing.json")
        assert "ingested 1 novels" in capsys.readouterr().out

    def test_bad_config_exit_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"corpus_root": ".", "output_root": ".",
                                   "alpha": 2.0}))
        assert main(["ingest", "--config", str(bad)]) == 1
        assert "config error" in capsys.readouterr().err


class TestGenerate:
    def test_dry_run_counts_plan(self, run, capsys):
        assert run("generate", "--models", "m1", "--dry-run") == 0
        assert "planned requests: 4" in capsys.readouterr().out

    def test_dry_run_two_models_two_prompts(self, run, capsys):
        assert run("generate", "--models", "m1,m2",
                   "--prompts", "Text,Title", "--dry-run") == 0
        assert "planned requests: 4" in capsys.readouterr().out

    def test_replay_miss_exits_2(self, run, capsys):
        assert run("generate", "--models", "m1", "--prompts", "Text") == 2
        assert "fixture miss" in capsys.readouterr().err


class TestAlign:
    def test_unknown_method_exit_1(self, run, capsys):
        assert run("align", "--method", "bm25") == 1
        assert "unknown method" in capsys.readouterr().err

    def test_embedding_requires_table(self, run, capsys):
        assert run("align", "--method", "embedding") == 1
        assert "--embeddings" in capsys.readouterr().err

    def test_tfidf_deterministic_and_resumable(self, run):
        assert run("align", "--method", "tfidf") == 0
        graph_path = run.out / "graphs" / "tfidf" / "carmilla-wikipedia.json"
        first = graph_path.read_bytes()
        manifest = json.loads((run.out / "align_manifest.json").read_text())
        assert manifest["produced_files"][0]["written"] is True

        assert run("align", "--method", "tfidf") == 0
        assert graph_path.read_bytes() == first
        manifest = json.loads((run.out / "align_manifest.json").read_text())
        assert manifest["produced_files"][0]["written"] is False

    def test_tfidf_degree_at_most_one(self, run):
        assert run("align", "--method", "tfidf") == 0
        graph = json.loads(
            (run.out / "graphs" / "tfidf" / "carmilla-wikipedia.json").read_text())
        sentences = [s for s, _ in graph["edges"]]
        assert len(sentences) == len(set(sentences))

    def test_llm_replay(self, run):
        assert run("align", "--method", "llm") == 0
        graph = json.loads(
            (run.out / "graphs" / "llm" / "carmilla-wikipedia.json").read_text())
        assert graph["method"] == "llm"
        assert graph["n_chapters"] == 17
        assert len(graph["edges"]) > 0

    def test_llm_replay_parallel_matches_serial(self, run):
        assert run("align", "--method", "llm") == 0
        path = run.out / "graphs" / "llm" / "carmilla-wikipedia.json"
        serial = path.read_bytes()
        shutil.rmtree(run.out)
        assert run("align", "--method", "llm", "--workers", "4") == 0
        assert path.read_bytes() == serial


class TestEvaluate:
    def test_gold_self_evaluation_is_100(self, run, capsys):
        assert run("evaluate", "--method", "gold") == 0
        rows = read_csv(run.out / "evaluation_gold.csv")
        pooled = [r for r in rows if r["novel"] == "POOLED"][0]
        assert float(pooled["precision"]) == 100.0
        assert float(pooled["recall"]) == 100.0
        assert float(pooled["f1"]) == 100.0
        assert float(pooled["macro_f1"]) == 100.0
        assert "pooled F1 = 100.0" in capsys.readouterr().out

    def test_llm_against_gold(self, run):
        assert run("align", "--method", "llm") == 0
        assert run("evaluate", "--method", "llm") == 0
        rows = read_csv(run.out / "evaluation_llm.csv")
        pooled = [r for r in rows if r["novel"] == "POOLED"][0]
        assert 0 < float(pooled["f1"]) <= 100

    def test_missing_gold_notice(self, run, tmp_path, capsys):
        bare = tmp_path / "bare_corpus"
        shutil.copytree(FIXTURES / "corpus", bare, ignore=shutil.ignore_patterns("gold"))
        cfg = dict(run.config, corpus_root=str(bare))
        run.config_path.write_text(json.dumps(cfg), encoding="utf-8")
        assert run("evaluate", "--method", "gold") == 0
        assert "no gold alignments" in capsys.readouterr().out

    def test_missing_graph_skipped(self, run, capsys):
        assert run("evaluate", "--method", "tfidf") == 0
        assert "skip: no tfidf graph" in capsys.readouterr().out


class TestMetrics:
    def test_metrics_csv_columns_and_values(self, run):
        assert run("align", "--method", "llm") == 0
        assert run("metrics", "--method", "llm") == 0
        rows = read_csv(run.out / "metrics.csv")
        assert len(rows) == 1
        row = rows[0]
        for col in ("summary_id", "novel_id", "author_kind",
                    "chapters_per_sentence", "linearity", "skew", "avg_match",
                    "token_count", "mean_dependency_distance",
                    "entities_per_100w"):
            assert col in row
        assert row["summary_id"] == "carmilla-wikipedia"
        assert row["author_kind"] == "human"
        assert float(row["chapters_per_sentence"]) >= 1.0
        assert -1 <= float(row["linearity"]) <= 1
        assert float(row["mean_dependency_distance"]) > 0

    def test_heatmap_rows_normalized(self, run):
        assert run("align", "--method", "llm") == 0
        assert run("metrics", "--method", "llm", "--bins", "10") == 0
        with open(run.out / "heatmap.csv", newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["book"] + [f"bin_{i}" for i in range(1, 11)]
        values = [float(v) for v in rows[1][1:]]
        assert sum(values) == pytest.approx(1.0, abs=1e-9)

    def test_aggregates_written(self, run):
        assert run("align", "--method", "llm") == 0
        assert run("metrics", "--method", "llm") == 0
        cells = json.loads((run.out / "aggregates.json").read_text())
        groups = {c["group"] for c in cells}
        assert groups == {"human"}
        with open(run.out / "aggregates.csv", encoding="utf-8") as f:
            header = f.readline()
        assert header.startswith("group,")


class TestReport:
    def test_tables_and_png(self, run):
        assert run("align", "--method", "llm") == 0
        assert run("metrics", "--method", "llm") == 0
        assert run("report") == 0
        tables = (run.out / "tables.md").read_text()
        assert tables.startswith("| group |")
        assert "human" in tables
        img = Image.open(run.out / "heatmap.png")
        assert img.mode == "L"
        assert img.size == (10 * 16, 1 * 16)


class TestRenderHeatmap:
    def test_pixel_mapping(self, tmp_path):
        matrix = HeatmapMatrix(book_ids=("b",), n_bins=3,
                               rows=np.array([[0.0, 0.5, 1.0]]))
        path = tmp_path / "h.png"
        render_heatmap(matrix, path, cell_px=1)
        px = np.asarray(Image.open(path))
        assert px.shape == (1, 3)
        assert px[0, 0] == 255   # zero mass -> white
        assert px[0, 2] == 0     # row max -> black
        assert px[0, 1] == round(255 * 0.5)

    def test_zero_row_stays_white(self, tmp_path):
        matrix = HeatmapMatrix(book_ids=("b",), n_bins=2,
                               rows=np.zeros((1, 2)))
        path = tmp_path / "h.png"
        render_heatmap(matrix, path, cell_px=1)
        assert np.asarray(Image.open(path)).tolist() == [[255, 255]]
