/** Sentence splitting and tokenization with whitespace recovery. */

export interface RawToken {
  text: string;
  /** Whitespace (or other skipped characters) following the token. */
  ws: string;
}

// Word tokens keep internal apostrophes ("don't", "Laura's"); everything
// else that is not whitespace becomes a single-character punctuation token.
const TOKEN_RE = /[A-Za-zÀ-ɏ0-9_]+(?:['’][A-Za-zÀ-ɏ0-9_]+)*|[^\sA-Za-zÀ-ɏ0-9_]/g;

const ABBREVIATIONS = new Set([
  "mr", "mrs", "ms", "dr", "prof", "rev", "st", "mme", "mlle", "capt",
  "col", "gen", "lt", "sgt", "jr", "sr", "vs", "etc", "e.g", "i.e",
]);

/** Tokenize one sentence, recording the whitespace after each token so the
 * concatenation of text + ws reproduces the input exactly. */
export function tokenizeSentence(text: string): RawToken[] {
  const tokens: RawToken[] = [];
  let cursor = 0;
  for (const match of text.matchAll(TOKEN_RE)) {
    const start = match.index ?? 0;
    if (tokens.length > 0) {
      tokens[tokens.length - 1].ws = text.slice(cursor, start);
    }
    tokens.push({ text: match[0], ws: "" });
    cursor = start + match[0].length;
  }
  if (tokens.length > 0) {
    tokens[tokens.length - 1].ws = text.slice(cursor);
  } else if (text.length > 0) {
    return [];
  }
  return tokens;
}

function endsWithAbbreviation(chunk: string): boolean {
  const m = chunk.match(/([A-Za-z][A-Za-z.]*)\.$/);
  if (!m) return false;
  const word = m[1].replace(/\.$/, "").toLowerCase();
  if (ABBREVIATIONS.has(word)) return true;
  return /^[A-Z]$/.test(m[1]); // single initial, e.g. "J. Sheridan"
}

/** Split prose into sentences on terminator + space + capital/digit/opener,
 * suppressing common abbreviations and single initials. */
export function splitSentences(text: string): string[] {
  const normalized = text.replace(/\s+/g, " ").trim();
  if (!normalized) return [];
  const sentences: string[] = [];
  let start = 0;
  const boundary = /[.!?]["'”’)\]]* (?=["'“‘(\[]*[A-Z0-9])/g;
  for (const match of normalized.matchAll(boundary)) {
    const end = (match.index ?? 0) + match[0].length - 1; // keep closers, drop space
    const candidate = normalized.slice(start, end).trimEnd();
    if (endsWithAbbreviation(candidate.replace(/["'”’)\]]+$/, ""))) {
      continue;
    }
    sentences.push(candidate);
    start = end + 1;
  }
  const tail = normalized.slice(start).trim();
  if (tail) sentences.push(tail);
  return sentences;
}
