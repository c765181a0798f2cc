"""Build the bundled replay fixture set: a 17-chapter mini corpus, a human
summary, gold alignments, recorded aligner responses, annotation files, and
golden hashes for the prompt templates and the replay pipeline outputs.

Run from the repo root: python3 scripts/build_fixtures.py

The recorded responses were frozen once; the pipeline acceptance test checks
that replaying them reproduces byte-identical outputs. Regenerating this
directory invalidates the frozen golden hashes on purpose — they are rewritten
here in the same pass.
"""

from __future__ import annotations

import hashlib
import json
import shutil
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from engagement.corpus import Novel, Chapter, Summary, load_corpus  # noqa: E402
from engagement.gateway import request_key, write_fixture  # noqa: E402
from engagement.prompts import (render_alignment_prompt,  # noqa: E402
                                render_generation_prompt)

FIXTURES = ROOT / "fixtures"
ALIGNER_MODEL = "gpt-oss-120b"

# ---------------------------------------------------------------------------
# Mini corpus: 17 chapters with chapter-distinct motifs
# ---------------------------------------------------------------------------

MOTIFS = [
    ("the schloss in Styria", "Laura describes her lonely childhood home"),
    ("a carriage accident", "a mysterious carriage overturns by the road"),
    ("the guest Carmilla", "the strange girl Carmilla becomes a guest"),
    ("an old portrait", "a restored portrait resembles Carmilla exactly"),
    ("a nocturnal visitor", "Laura dreams of a beast visiting her chamber"),
    ("the village funeral", "a funeral procession passes as Carmilla rages"),
    ("a wandering peddler", "a peddler offers charms against the oupire"),
    ("Laura's illness", "Laura grows pale and weak with strange dreams"),
    ("the doctor's visit", "a physician finds a small blue mark on her throat"),
    ("the ruined village", "father and daughter travel toward Karnstein"),
    ("General Spielsdorf", "the General recounts the death of his ward Bertha"),
    ("the masked ball", "at a ball the Countess introduces her daughter Millarca"),
    ("Bertha's decline", "Bertha sickens after Millarca joins the household"),
    ("the General's vigil", "the General hides and sees a black creature"),
    ("the ruined chapel", "they reach the chapel of the Karnstein family"),
    ("the tomb opened", "the tomb of Mircalla is opened and the vampire destroyed"),
    ("the aftermath", "Laura reflects on the ambiguous memory of Carmilla"),
]

FILLER = ("The forest lay silent beyond the drawbridge. Evening settled over "
          "the towers while servants lit the lamps.")


def chapter_text(i: int) -> str:
    topic, event = MOTIFS[i - 1]
    return (f"In this part of the story, {event}. The scene dwells on {topic}. "
            f"{FILLER}\n\nNothing else of consequence occurs before the next "
            f"chapter begins.\n")


SUMMARY_SENTENCES = [
    "Laura recalls her isolated childhood at the schloss in Styria.",
    "After a carriage accident near the road, the mysterious girl Carmilla "
    "becomes a guest of the family.",
    "A restored portrait of Mircalla, Countess Karnstein, resembles Carmilla exactly.",
    "Laura dreams of a beast that visits her chamber at night.",
    "During a village funeral, Carmilla flies into an inexplicable rage.",
    "Laura grows pale and weak, and a physician finds a small blue mark on her throat.",
    "Laura and her father travel toward the ruined village of Karnstein.",
    "On the way they meet General Spielsdorf, who recounts the death of his ward Bertha.",
    "The General tells how a Countess introduced her daughter Millarca at a masked ball.",
    "Bertha sickened after Millarca joined the household, and the General kept "
    "a vigil and saw a black creature.",
    "At the ruined chapel the tomb of Mircalla is opened and the vampire is destroyed.",
    "Laura reflects on the ambiguous memory of Carmilla long afterward.",
]

# Adjudicated gold truth: sentence -> chapters (1-based, 17 chapters).
GOLD = {
    1: [1],
    2: [2, 3],
    3: [4],
    4: [5],
    5: [6],
    6: [8, 9],
    7: [10],
    8: [11],
    9: [12],
    10: [13, 14],
    11: [15, 16],
    12: [17],
}

# Recorded aligner behavior: gold with two misses and two spurious matches,
# frozen so the replay F1 is stable.
PREDICTED = {s: list(cs) for s, cs in GOLD.items()}
PREDICTED[2] = [2]            # miss: (2, 3)
PREDICTED[10] = [13]          # miss: (10, 14)
PREDICTED[4] = [5, 8]         # spurious: (4, 8)
PREDICTED[12] = [17, 16]      # spurious: (12, 16)

# Annotator B disagrees with the adjudicated set on two cells.
ANNOTATOR_B_FLIPS = [(3, 4), (6, 8)]   # B says NO where gold says YES


def edges_from(mapping: dict[int, list[int]]) -> list[list[int]]:
    return sorted([s, c] for s, cs in mapping.items() for c in cs)


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def build_corpus(corpus_root: Path):
    novel_dir = corpus_root / "novels" / "carmilla"
    (novel_dir / "chapters").mkdir(parents=True)
    (novel_dir / "meta.json").write_text(json.dumps({
        "title": "Carmilla", "author": "Joseph Sheridan Le Fanu",
        "source_id": "10007"}, indent=2), encoding="utf-8")
    for i in range(1, 18):
        (novel_dir / "chapters" / f"{i:03d}.txt").write_text(
            chapter_text(i), encoding="utf-8")

    summaries = corpus_root / "summaries"
    summaries.mkdir(parents=True)
    (summaries / "carmilla-wikipedia.json").write_text(json.dumps({
        "novel_id": "carmilla", "author_kind": "human",
        "raw_text": " ".join(SUMMARY_SENTENCES)}, indent=2, ensure_ascii=False),
        encoding="utf-8")


def build_gold(corpus_root: Path):
    gold_dir = corpus_root / "gold"
    gold_dir.mkdir(parents=True)
    n_sent = len(SUMMARY_SENTENCES)
    base = {"summary_id": "carmilla-wikipedia", "novel_id": "carmilla",
            "n_sentences": n_sent, "n_chapters": 17, "method": "gold"}
    (gold_dir / "carmilla-wikipedia.json").write_text(json.dumps(
        {**base, "annotator": "adjudicated", "edges": edges_from(GOLD)},
        indent=2), encoding="utf-8")

    annot_dir = FIXTURES / "annotator_gold"
    annot_dir.mkdir(parents=True)
    (annot_dir / "carmilla-wikipedia__a.json").write_text(json.dumps(
        {**base, "annotator": "a", "edges": edges_from(GOLD)}, indent=2),
        encoding="utf-8")
    b_edges = [e for e in edges_from(GOLD) if tuple(e) not in
               {t for t in ANNOTATOR_B_FLIPS}]
    (annot_dir / "carmilla-wikipedia__b.json").write_text(json.dumps(
        {**base, "annotator": "b", "edges": b_edges}, indent=2),
        encoding="utf-8")


def build_annotations(corpus_root: Path):
    """Checked-in annotation fixtures so the primary metrics run without the
    annotation exporter. Heads form a simple left-headed chain per sentence;
    capitalized non-initial names get PERSON spans."""
    from engagement.corpus import tokenize
    ann_dir = corpus_root / "annotations"
    ann_dir.mkdir(parents=True)
    names = {"Laura", "Carmilla", "Mircalla", "Millarca", "Bertha", "Spielsdorf"}
    sentences = []
    for text in SUMMARY_SENTENCES:
        tokens = tokenize(text)
        token_objs = [{"text": t, "head": 0 if k == 0 else k}
                      for k, t in enumerate(tokens)]
        entities = [{"start_token": k + 1, "end_token": k + 1, "label": "PERSON"}
                    for k, t in enumerate(tokens) if t in names]
        sentences.append({"tokens": token_objs, "entities": entities})
    (ann_dir / "carmilla-wikipedia.ann.json").write_text(json.dumps({
        "doc_id": "carmilla-wikipedia", "pipeline_version": "fixture-1",
        "sentences": sentences}, indent=2), encoding="utf-8")


def build_llm_fixtures(corpus_root: Path):
    """Replicate the sequential alignment loop to key each recorded response."""
    novels, summaries = load_corpus(corpus_root)
    novel, summary = novels[0], summaries[0]
    fixture_dir = FIXTURES / "llm"
    fixture_dir.mkdir(parents=True)

    edges: set[tuple[int, int]] = set()
    for chapter in novel.chapters:
        old_ids = {s for s, c in edges if c < chapter.index}
        prompt = render_alignment_prompt(summary, chapter.text, old_ids)
        yes = sorted(s for s, cs in PREDICTED.items() if chapter.index in cs)
        answers = {str(i): ("YES" if i in yes else "NO")
                   for i in range(1, summary.n_sentences + 1)}
        text = "```json\n" + json.dumps(answers, indent=1) + "\n```"
        key = request_key(ALIGNER_MODEL, prompt, 0.0)
        write_fixture(fixture_dir, {
            "request": {"model": ALIGNER_MODEL, "prompt": prompt,
                        "temperature": 0.0, "max_output_tokens": 2048,
                        "request_key": key},
            "response": {"text": text, "finish_reason": "stop",
                         "usage": {"prompt_tokens": 0, "completion_tokens": 0}},
        })
        edges.update((s, chapter.index) for s in yes)


def build_prompt_goldens():
    chapters = tuple(Chapter.from_text(i, t) for i, t in
                     enumerate(["abc def ghi", "jkl mno pqr"], start=1))
    novel = Novel(id="kim", title="Kim", author="Rudyard Kipling",
                  chapters=chapters)
    from engagement.corpus import SummarySentence
    summary = Summary(id="kim-test", novel_id="kim", author_kind="human",
                      sentences=(
                          SummarySentence(1, "A boy travels the Grand Trunk Road.", 7),
                          SummarySentence(2, "He becomes a chela to a lama.", 7),
                      ))
    guidelines = "Keep plot summaries concise and spoiler-complete."
    renders = {
        "alignment": render_alignment_prompt(summary, "Some chapter text.", {2, 1}),
        "Text": render_generation_prompt("Text", novel),
        "TextInst": render_generation_prompt("TextInst", novel, guidelines),
        "Title": render_generation_prompt("Title", novel),
        "TitleInst": render_generation_prompt("TitleInst", novel, guidelines),
    }
    goldens = FIXTURES / "goldens"
    goldens.mkdir(parents=True, exist_ok=True)
    (goldens / "prompt_renders.json").write_text(
        json.dumps(renders, indent=2, ensure_ascii=False), encoding="utf-8")
    hashes = {k: hashlib.sha256(v.encode("utf-8")).hexdigest()
              for k, v in renders.items()}
    (goldens / "prompt_hashes.json").write_text(json.dumps(hashes, indent=2),
                                                encoding="utf-8")


def build_replay_goldens():
    """Run the replay pipeline once and freeze output hashes."""
    import tempfile
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "out"
        config = {
            "corpus_root": str(FIXTURES / "corpus"),
            "output_root": str(out),
            "aligner": {"model": ALIGNER_MODEL, "temperature": 0.0},
            "transport": {"mode": "replay", "fixture_dir": str(FIXTURES / "llm")},
            "alpha": 0.01,
            "heatmap_bins": 10,
        }
        config_path = Path(tmp) / "config.json"
        config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")
        env_cmd = [sys.executable, "-m", "engagement.cli"]
        for step in (["ingest"], ["align", "--method", "llm"],
                     ["evaluate", "--method", "llm"],
                     ["metrics", "--method", "llm"], ["report"]):
            r = subprocess.run(env_cmd + step + ["--config", str(config_path)],
                               cwd=ROOT, capture_output=True, text=True,
                               env={"PYTHONPATH": str(ROOT / "src"), "PATH": "/usr/bin:/bin"})
            if r.returncode != 0:
                raise SystemExit(f"pipeline step {step} failed:\n{r.stdout}\n{r.stderr}")
        tracked = ["graphs/llm/carmilla-wikipedia.json", "evaluation_llm.csv",
                   "metrics.csv", "aggregates.csv", "heatmap.csv", "tables.md",
                   "heatmap.png"]
        hashes = {rel: sha256_file(out / rel) for rel in tracked}
        (FIXTURES / "goldens" / "replay_hashes.json").write_text(
            json.dumps(hashes, indent=2), encoding="utf-8")


def main():
    if FIXTURES.exists():
        shutil.rmtree(FIXTURES)
    corpus_root = FIXTURES / "corpus"
    build_corpus(corpus_root)
    build_gold(corpus_root)
    build_annotations(corpus_root)
    build_llm_fixtures(corpus_root)
    build_prompt_goldens()
    build_replay_goldens()
    print(f"fixtures written to {FIXTURES}")


if __name__ == "__main__":
    main()
