"""Byte-exact rendering of the five prompt templates.

Templates are frozen strings; tests pin their rendered SHA-256 hashes against
golden files so accidental edits are caught.
"""

from __future__ import annotations

from .corpus import Novel, Summary

ALIGNMENT_TEMPLATE = """\
You are an intelligent literary assistant. Your goal is to match summary sentences to a novel chapter using **only** the information provided below. Do not use any memorized information.

SUMMARY SENTENCES:
```
{summary}
```

CHAPTER:
```
{text}
```

TASK:
Determine whether each sentence in the summary describes an event or events that happen(s) during this chapter.

Some sentences describe multiple related events. A sentence should be matched to each chapter that contains **at least one** event it describes.

Double-check that the event in this chapter is the exact event described in the summary sentence before matching.

Here are the summary sentence ids that have already been matched to previous chapters: {old_ids}

**DO NOT** match sentences to chapters that only mention events which happened previously in the text. Think carefully about whether the event is *actually happening* before re-matching sentences.

Remember to make matches based **only** on the summary and chapter provided.

OUTPUT FORMAT:
For **every** sentence, output whether it should be matched to this chapter (YES or NO).
Return ONLY {{ "1": "YES|NO", "2": "YES|NO", ... }}"""

_INSTRUCTION = ("Summarize the above story in as many paragraphs as needed. "
                "Respond with only the summary. Don't add any additional text.")

_TITLE_INSTRUCTION = ('Summarize the plot of "{title}" by {author} in as many '
                      "paragraphs as needed. Respond with only the summary. "
                      "Don't add any additional text.")

GENERATION_TEMPLATES = {
    "Text": '{{"text": "{full_text}"}}\n\n' + _INSTRUCTION,
    "TextInst": '{{"text": "{full_text}", "guidelines": "{guidelines}"}}\n\n' + _INSTRUCTION,
    "Title": _TITLE_INSTRUCTION,
    "TitleInst": '{{"guidelines": "{guidelines}"}}\n\n' + _TITLE_INSTRUCTION,
}


class PromptError(ValueError):
    """A template precondition was violated (missing guidelines/chapters)."""


def render_generation_prompt(variant: str, novel: Novel,
                             guidelines: str | None = None) -> str:
    if variant not in GENERATION_TEMPLATES:
        raise PromptError(f"unknown prompt variant {variant!r}")
    needs_inst = variant in ("TextInst", "TitleInst")
    if needs_inst and not guidelines:
        raise PromptError(f"variant {variant!r} requires guidelines")
    needs_text = variant in ("Text", "TextInst")
    if needs_text and not novel.chapters:
        raise PromptError(f"variant {variant!r} requires novel chapters")
    return GENERATION_TEMPLATES[variant].format(
        full_text=novel.full_text() if needs_text else "",
        guidelines=guidelines or "",
        title=novel.title,
        author=novel.author,
    )


def render_alignment_prompt(summary: Summary, chapter_text: str,
                            old_ids: set[int]) -> str:
    bad = [i for i in old_ids if not 1 <= i <= summary.n_sentences]
    if bad:
        raise PromptError(f"old_ids out of range: {sorted(bad)}")
    indexed = "\n".join(f"{s.index}. {s.text}" for s in summary.sentences)
    serialized_ids = "[" + ", ".join(str(i) for i in sorted(old_ids)) + "]"
    return ALIGNMENT_TEMPLATE.format(summary=indexed, text=chapter_text,
                                     old_ids=serialized_ids)
