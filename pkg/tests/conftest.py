import json
from pathlib import Path

import pytest

from engagement.aligner import AlignmentGraph
from engagement.corpus import Summary, SummarySentence, count_tokens

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def fixture_corpus_root() -> Path:
    return FIXTURES / "corpus"


def make_graph(edges, n_sentences=None, n_chapters=None, method="gold",
               summary_id="s", novel_id="n") -> AlignmentGraph:
    edges = set(edges)
    return AlignmentGraph(
        summary_id=summary_id, novel_id=novel_id,
        n_sentences=n_sentences or max((s for s, _ in edges), default=1),
        n_chapters=n_chapters or max((c for _, c in edges), default=1),
        edges=frozenset(edges), method=method)


def make_summary(texts, summary_id="s", novel_id="n", **kwargs) -> Summary:
    sentences = tuple(SummarySentence(i, t, count_tokens(t))
                      for i, t in enumerate(texts, start=1))
    return Summary(id=summary_id, novel_id=novel_id,
                   author_kind=kwargs.pop("author_kind", "human"),
                   sentences=sentences, **kwargs)


def write_json(path: Path, data) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2), encoding="utf-8")
    return path
