"""Corpus ingestion: chapter segmentation, sentence splitting, token counts.

On-disk layout expected by ``load_corpus``:

    <root>/novels/<id>/meta.json            {title, author, source_id?}
    <root>/novels/<id>/chapters/NNN.txt     one file per chapter
    <root>/novels/<id>/segmentation.json    optional heading-rule overrides
    <root>/summaries/<summary-id>.json      {novel_id, author_kind, model_name?,
                                             prompt_variant?, raw_text}
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

PROMPT_VARIANTS = ("Text", "TextInst", "Title", "TitleInst")


class CorpusError(Exception):
    """Raised for malformed corpus files or dangling references."""


# ---------------------------------------------------------------------------
# Tokenization
# ---------------------------------------------------------------------------

# Runs of letters/digits; apostrophe-joined contractions stay one token.
_WORD_RE = re.compile(r"[^\W_]+(?:['’][^\W_]+)*", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Word tokens under the documented word rule (letters/digits runs)."""
    return _WORD_RE.findall(text)


def count_tokens(text: str) -> int:
    return len(tokenize(text))


# ---------------------------------------------------------------------------
# Text normalization (curly quotes, em-dash unification, line endings)
# ---------------------------------------------------------------------------

_PUNCT_MAP = str.maketrans({
    "‘": "'", "’": "'",
    "“": '"', "”": '"',
    "–": "--", "—": "--",
})


def normalize_punctuation(text: str) -> str:
    return text.replace("\r\n", "\n").replace("\r", "\n").translate(_PUNCT_MAP)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Chapter:
    index: int              # 1-based, contiguous within a novel
    heading: str            # matched heading line, "" when none
    text: str               # body text (heading excluded)
    token_count: int

    @classmethod
    def from_text(cls, index: int, text: str, heading: str = "") -> "Chapter":
        return cls(index=index, heading=heading, text=text,
                   token_count=count_tokens(text))


@dataclass(frozen=True)
class SummarySentence:
    index: int              # 1-based, contiguous within a summary
    text: str
    token_count: int


@dataclass(frozen=True)
class Novel:
    id: str
    title: str
    author: str
    chapters: tuple[Chapter, ...]
    source_id: str | None = None

    def __post_init__(self):
        if not self.chapters:
            raise CorpusError(f"novel {self.id!r} has no chapters")
        for i, ch in enumerate(self.chapters, start=1):
            if ch.index != i:
                raise CorpusError(
                    f"novel {self.id!r}: chapter indices not contiguous at {ch.index}")

    @property
    def n_chapters(self) -> int:
        return len(self.chapters)

    def full_text(self) -> str:
        parts = []
        for ch in self.chapters:
            parts.append(ch.heading + "\n" + ch.text if ch.heading else ch.text)
        return "\n\n".join(parts)


@dataclass(frozen=True)
class Summary:
    id: str
    novel_id: str
    author_kind: str        # "human" | "model"
    sentences: tuple[SummarySentence, ...]
    model_name: str | None = None
    prompt_variant: str | None = None

    def __post_init__(self):
        if self.author_kind not in ("human", "model"):
            raise CorpusError(f"summary {self.id!r}: bad author_kind {self.author_kind!r}")
        is_model = self.author_kind == "model"
        if is_model != (self.model_name is not None) or \
           is_model != (self.prompt_variant is not None):
            raise CorpusError(
                f"summary {self.id!r}: model_name/prompt_variant present iff author_kind=model")
        if self.prompt_variant is not None and self.prompt_variant not in PROMPT_VARIANTS:
            raise CorpusError(f"summary {self.id!r}: bad prompt_variant {self.prompt_variant!r}")
        for i, s in enumerate(self.sentences, start=1):
            if s.index != i:
                raise CorpusError(f"summary {self.id!r}: sentence indices not contiguous")

    @property
    def n_sentences(self) -> int:
        return len(self.sentences)

    def text(self) -> str:
        return " ".join(s.text for s in self.sentences)


# ---------------------------------------------------------------------------
# Sentence splitting
# ---------------------------------------------------------------------------

# Abbreviations whose trailing period does not end a sentence.
ABBREVIATIONS = frozenset({
    "mr", "mrs", "ms", "dr", "prof", "st", "rev", "hon", "esq",
    "capt", "col", "gen", "lt", "sgt", "maj", "cmdr", "adm", "fr",
    "sr", "jr", "messrs", "mme", "mlle", "mons", "bros",
    "no", "nos", "mt", "ft", "vol", "ch", "chap", "fig", "pp",
    "vs", "etc", "viz", "cf", "al", "seq",
    "e.g", "i.e",
})

_OPENERS = "\"'(‘“"
_CLOSERS = "\"')’”"


def _is_abbreviation(prefix: str) -> bool:
    """True when the word ending at a period should not terminate a sentence."""
    m = re.search(r"([A-Za-z](?:\.[A-Za-z])*|[\w']+)$", prefix)
    if not m:
        return False
    word = m.group(1)
    if len(word) == 1 and word.isupper():
        return True  # personal initial, "J."
    return word.lower() in ABBREVIATIONS


def split_sentences(text: str) -> list[SummarySentence]:
    """Deterministic rule-based sentence splitter.

    Boundary rule: a terminator (. ! ?), optionally followed by closing
    quotes/brackets, followed by whitespace and a capital letter, digit, or
    opening quote — unless the preceding word is a known abbreviation or a
    single-letter initial.
    """
    normalized = re.sub(r"\s+", " ", text).strip()
    if not normalized:
        return []

    boundaries = []
    i = 0
    n = len(normalized)
    while i < n:
        ch = normalized[i]
        if ch in ".!?":
            j = i + 1
            while j < n and normalized[j] in _CLOSERS:
                j += 1
            if j >= n:
                break
            if normalized[j] == " " and j + 1 < n:
                nxt = normalized[j + 1]
                starts_new = nxt.isupper() or nxt.isdigit() or nxt in _OPENERS
                if starts_new and not (ch == "." and _is_abbreviation(normalized[:i])):
                    boundaries.append(j)
                    i = j + 1
                    continue
        i += 1

    pieces = []
    start = 0
    for b in boundaries:
        pieces.append(normalized[start:b])
        start = b + 1
    pieces.append(normalized[start:])

    return [SummarySentence(index=k, text=p, token_count=count_tokens(p))
            for k, p in enumerate(pieces, start=1) if p.strip()]


# ---------------------------------------------------------------------------
# Chapter segmentation
# ---------------------------------------------------------------------------

DEFAULT_HEADING_PATTERNS = (
    r"(?:CHAPTER|Chapter)\s+(?:[IVXLCDM]+|\d+)\b[.:]?(?:\s+\S.*)?",
    r"[IVXLCDM]+\.",
    r"(?=.*[A-Z])[A-Z][A-Z0-9 ,.'\-:;!?]{2,48}",   # short all-caps line
)


@dataclass(frozen=True)
class SegmentationConfig:
    heading_patterns: tuple[str, ...] = DEFAULT_HEADING_PATTERNS

    @classmethod
    def from_file(cls, path: Path) -> "SegmentationConfig":
        data = json.loads(path.read_text(encoding="utf-8"))
        return cls(heading_patterns=tuple(data["heading_patterns"]))


class SegmentationConfigError(CorpusError):
    """Two heading patterns matched the same offset, or patterns are invalid."""


@dataclass
class SegmentationResult:
    chapters: list[Chapter]
    headings: list[str]             # manifest for human validation
    no_headings_warning: bool
    preamble: str = ""              # text before the first heading
    heading_lines: list[str] = field(default_factory=list)  # raw lines incl. newline

    def reconstruct(self) -> str:
        """Reassemble the cleaned source text byte-for-byte."""
        parts = [self.preamble]
        for k, ch in enumerate(self.chapters):
            if self.heading_lines:
                parts.append(self.heading_lines[k])
            parts.append(ch.text)
        return "".join(parts)


def segment_chapters(raw_text: str,
                     rules: SegmentationConfig | None = None) -> SegmentationResult:
    """Split cleaned novel text into chapters at configured heading lines."""
    rules = rules or SegmentationConfig()
    compiled = [re.compile(p) for p in rules.heading_patterns]

    matches: dict[int, tuple[int, str]] = {}   # line start -> (line end, heading)
    offset = 0
    for line in raw_text.splitlines(keepends=True):
        stripped = line.rstrip("\n")
        hits = [p for p in compiled if p.fullmatch(stripped.strip())]
        if stripped.strip() and hits:
            if len(hits) > 1 and len({p.pattern for p in hits}) != len(hits):
                raise SegmentationConfigError(
                    f"duplicate heading patterns match line at offset {offset}")
            matches[offset] = (offset + len(line), stripped)
        offset += len(line)

    if not matches:
        ch = Chapter.from_text(1, raw_text)
        return SegmentationResult([ch], [], no_headings_warning=True)

    starts = sorted(matches)
    chapters = []
    headings = []
    heading_lines = []
    for k, s in enumerate(starts):
        line_end, heading = matches[s]
        body_end = starts[k + 1] if k + 1 < len(starts) else len(raw_text)
        # keep exact bytes: heading line is raw_text[s:line_end], body follows
        body = raw_text[line_end:body_end]
        chapters.append(Chapter.from_text(k + 1, body, heading=heading))
        headings.append(heading)
        heading_lines.append(raw_text[s:line_end])
    return SegmentationResult(chapters, headings, no_headings_warning=False,
                              preamble=raw_text[:starts[0]],
                              heading_lines=heading_lines)


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def load_novel(novel_dir: Path) -> Novel:
    novel_id = novel_dir.name
    meta_path = novel_dir / "meta.json"
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CorpusError(f"missing meta.json for novel {novel_id!r} ({meta_path})")
    except json.JSONDecodeError as e:
        raise CorpusError(f"malformed {meta_path}: line {e.lineno}: {e.msg}")

    chapter_dir = novel_dir / "chapters"
    files = sorted(chapter_dir.glob("*.txt"))
    if not files:
        raise CorpusError(f"novel {novel_id!r} has no chapter files in {chapter_dir}")
    chapters = []
    for i, f in enumerate(files, start=1):
        if int(f.stem) != i:
            raise CorpusError(f"chapter files for {novel_id!r} not contiguous at {f.name}")
        chapters.append(Chapter.from_text(i, f.read_text(encoding="utf-8")))
    return Novel(id=novel_id, title=meta["title"], author=meta["author"],
                 chapters=tuple(chapters), source_id=meta.get("source_id"))


def load_summary(path: Path) -> Summary:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise CorpusError(f"malformed {path}: line {e.lineno}: {e.msg}")
    for key in ("novel_id", "author_kind", "raw_text"):
        if key not in data:
            raise CorpusError(f"{path}: missing required key {key!r}")
    sentences = split_sentences(normalize_punctuation(data["raw_text"]))
    return Summary(
        id=path.stem,
        novel_id=data["novel_id"],
        author_kind=data["author_kind"],
        model_name=data.get("model_name"),
        prompt_variant=data.get("prompt_variant"),
        sentences=tuple(sentences),
    )


def load_corpus(root: Path) -> tuple[list[Novel], list[Summary]]:
    """Load all novels and summaries; summaries must reference loaded novels."""
    root = Path(root)
    novels = [load_novel(d) for d in sorted((root / "novels").iterdir()) if d.is_dir()]
    novel_ids = {n.id for n in novels}

    summaries = []
    summary_dir = root / "summaries"
    for f in sorted(summary_dir.glob("*.json")) if summary_dir.is_dir() else []:
        s = load_summary(f)
        if s.novel_id not in novel_ids:
            raise CorpusError(f"{f}: unknown novel_id {s.novel_id!r}")
        summaries.append(s)
    return novels, summaries
