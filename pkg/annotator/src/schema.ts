/**
 * Annotation document schema shared with the core metrics loader:
 * `{doc_id, sentences: [{tokens: [{text, head}], entities:
 * [{start_token, end_token, label}]}]}`.
 *
 * Tokens additionally carry `ws`, the whitespace that followed the token in
 * the source text, so `tokens.map(t => t.text + t.ws).join("")` reproduces
 * the sentence verbatim. The core loader ignores the extra field.
 */

export interface Token {
  text: string;
  /** 1-based index of the syntactic head within the sentence; 0 = root. */
  head: number;
  /** Trailing whitespace recorded from the source text. */
  ws: string;
}

export interface Entity {
  start_token: number; // 1-based, inclusive
  end_token: number;   // 1-based, inclusive
  label: string;
}

export interface AnnotatedSentence {
  tokens: Token[];
  entities: Entity[];
}

export interface AnnotationDocument {
  doc_id: string;
  pipeline_version: string;
  /** sha256 of the source text, used for idempotent reruns. */
  source_sha256: string;
  sentences: AnnotatedSentence[];
}

export class SchemaError extends Error {}

/** Reject malformed sentences before anything reaches disk. */
export function validateSentence(sentence: AnnotatedSentence): void {
  const n = sentence.tokens.length;
  const roots = sentence.tokens.filter((t) => t.head === 0);
  if (n > 0 && roots.length !== 1) {
    throw new SchemaError(`expected exactly one root token, got ${roots.length}`);
  }
  sentence.tokens.forEach((t, i) => {
    if (!Number.isInteger(t.head) || t.head < 0 || t.head > n) {
      throw new SchemaError(`token ${i + 1}: head ${t.head} out of range 0..${n}`);
    }
    if (t.head === i + 1) {
      throw new SchemaError(`token ${i + 1}: head points at itself`);
    }
  });
  const spans = [...sentence.entities].sort((a, b) => a.start_token - b.start_token);
  for (const e of spans) {
    if (e.start_token < 1 || e.end_token > n || e.start_token > e.end_token) {
      throw new SchemaError(
        `entity span (${e.start_token},${e.end_token}) out of bounds 1..${n}`);
    }
  }
  for (let i = 1; i < spans.length; i++) {
    if (spans[i].start_token <= spans[i - 1].end_token) {
      throw new SchemaError("overlapping entity spans");
    }
  }
}

export function validateDocument(doc: AnnotationDocument): void {
  if (!doc.doc_id) throw new SchemaError("doc_id required");
  if (!doc.pipeline_version) throw new SchemaError("pipeline_version required");
  doc.sentences.forEach((s, i) => {
    try {
      validateSentence(s);
    } catch (e) {
      throw new SchemaError(`sentence ${i}: ${(e as Error).message}`);
    }
  });
}
