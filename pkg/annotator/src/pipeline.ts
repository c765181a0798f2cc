/**
 * Deterministic rule-based dependency and named-entity pipeline.
 *
 * The exporter pins this lightweight pipeline and stamps every output with
 * PIPELINE_VERSION; downstream tolerances absorb model variance, and the
 * goldens are regenerated from the pipeline and hand-verified when rules
 * change.
 */

import { Entity, Token } from "./schema.js";
import { RawToken } from "./tokenize.js";

export const PIPELINE_VERSION = "rulepipe-1.0.0";

const DETERMINERS = new Set([
  "a", "an", "the", "this", "that", "these", "those", "my", "your", "his",
  "her", "its", "our", "their", "no", "every", "each", "some", "any",
]);

const PREPOSITIONS = new Set([
  "in", "on", "at", "to", "from", "by", "with", "of", "for", "into", "onto",
  "over", "under", "near", "through", "toward", "towards", "about", "against",
  "during", "before", "after", "between", "among", "without", "within",
]);

const CONJUNCTIONS = new Set(["and", "or", "but", "nor", "so", "yet", "while"]);

// Base forms; inflections are stripped before lookup.
const VERB_LEXICON = new Set([
  "be", "is", "are", "was", "were", "been", "being", "am",
  "have", "has", "had", "do", "does", "did",
  "go", "went", "gone", "come", "came", "say", "said", "see", "saw", "seen",
  "make", "made", "take", "took", "taken", "get", "got", "give", "gave",
  "find", "found", "tell", "told", "know", "knew", "think", "thought",
  "become", "became", "leave", "left", "feel", "felt", "bring", "brought",
  "begin", "began", "keep", "kept", "hold", "held", "write", "wrote",
  "stand", "stood", "hear", "heard", "let", "mean", "meant", "set", "meet",
  "met", "run", "ran", "read", "ride", "rode", "grow", "grew", "fall", "fell",
  "fly", "flew", "rise", "rose", "sleep", "slept", "live", "recall", "travel",
  "describe", "visit", "arrive", "reveal", "discover", "return", "remain",
  "seem", "appear", "die", "dwell", "settle", "watch", "dream", "open",
  "destroy", "identify", "confirm", "linger", "recover", "reach", "share",
]);

// Small closed lexicon of given names; used to resolve sentence-initial
// capitalized tokens, where capitalization alone is uninformative.
const PERSON_NAMES = new Set([
  "anne", "anna", "laura", "carmilla", "mircalla", "kim", "marcia", "emily",
  "jane", "mary", "elizabeth", "john", "james", "peter", "paul", "george",
  "henry", "thomas", "william", "charles", "richard", "arthur", "vordenburg",
  "spielsdorf", "karnstein",
]);

const HONORIFICS = new Set(["mr", "mrs", "ms", "dr", "prof", "general",
  "baron", "captain", "count", "countess", "lady", "lord", "sir"]);

function isWord(text: string): boolean {
  return /^[A-Za-zÀ-ɏ]/.test(text);
}

function isCapitalized(text: string): boolean {
  return /^[A-ZÀ-Þ]/.test(text);
}

export function isVerb(text: string): boolean {
  const w = text.toLowerCase();
  if (VERB_LEXICON.has(w)) return true;
  // strip the common inflections and retry: -s/-es, -ed, -ing
  for (const [suffix, replacement] of [["ies", "y"], ["es", ""], ["s", ""],
                                       ["ed", ""], ["ed", "e"],
                                       ["ing", ""], ["ing", "e"]] as const) {
    if (w.length > suffix.length + 1 && w.endsWith(suffix) &&
        VERB_LEXICON.has(w.slice(0, -suffix.length) + replacement)) {
      return true;
    }
  }
  return false;
}

type Pos = "DET" | "ADP" | "CONJ" | "VERB" | "PUNCT" | "NOUN";

function classify(text: string, index: number): Pos {
  if (!isWord(text)) return "PUNCT";
  const w = text.toLowerCase();
  if (DETERMINERS.has(w)) return "DET";
  if (PREPOSITIONS.has(w)) return "ADP";
  if (CONJUNCTIONS.has(w)) return "CONJ";
  // capitalized mid-sentence tokens are names, never verbs
  if (index > 0 && isCapitalized(text)) return "NOUN";
  if (isVerb(text)) return "VERB";
  return "NOUN";
}

/**
 * Assign one head per token:
 *  - the first verb is the root (first word if the sentence has no verb);
 *  - determiners attach to the next noun, prepositions to the previous
 *    content word, and a preposition's object attaches to the preposition;
 *  - everything else (including punctuation) attaches to the nearest verb on
 *    the left, falling back to the root.
 */
export function assignHeads(tokens: RawToken[]): Token[] {
  const n = tokens.length;
  if (n === 0) return [];
  const pos = tokens.map((t, i) => classify(t.text, i));

  let root = pos.indexOf("VERB");
  if (root === -1) root = 0;

  const heads = new Array<number>(n).fill(root + 1);
  heads[root] = 0;

  const nextNoun = (from: number): number => {
    for (let j = from + 1; j < n; j++) {
      if (pos[j] === "NOUN") return j;
      if (pos[j] === "PUNCT" || pos[j] === "VERB") break;
    }
    return root;
  };
  const prevContent = (from: number): number => {
    for (let j = from - 1; j >= 0; j--) {
      if (pos[j] === "NOUN" || pos[j] === "VERB") return j;
    }
    return root;
  };
  const prevVerb = (from: number): number => {
    for (let j = from - 1; j >= 0; j--) {
      if (pos[j] === "VERB") return j;
    }
    return root;
  };

  for (let i = 0; i < n; i++) {
    if (i === root) continue;
    switch (pos[i]) {
      case "DET":
        heads[i] = nextNoun(i) + 1;
        break;
      case "ADP":
        heads[i] = prevContent(i) + 1;
        break;
      case "NOUN": {
        // object of a preposition attaches to the preposition
        let j = i - 1;
        while (j >= 0 && (pos[j] === "DET" || pos[j] === "NOUN")) j--;
        if (j >= 0 && pos[j] === "ADP") {
          heads[i] = j + 1;
        } else if (j >= 0 && pos[j] === "NOUN") {
          heads[i] = j + 1; // compound name: attach to the first of the run
        } else {
          heads[i] = prevVerb(i) + 1;
        }
        break;
      }
      case "CONJ":
      case "VERB":
      case "PUNCT":
        heads[i] = prevVerb(i) === i ? root + 1 : prevVerb(i) + 1;
        break;
    }
    if (heads[i] === i + 1) heads[i] = root === i ? 0 : root + 1;
  }

  return tokens.map((t, i) => ({ text: t.text, head: heads[i], ws: t.ws }));
}

const GPE_PREPOSITIONS = new Set(["in", "at", "to", "from", "near", "toward",
  "towards", "of"]);

/**
 * Mark maximal runs of capitalized words as entities. Runs preceded by an
 * honorific or whose first word is a known given name are PERSON; runs
 * governed by a locative preposition are GPE; remaining mid-sentence runs
 * default to PERSON (in narrative prose, unknown proper names are mostly
 * characters).
 */
export function extractEntities(tokens: Token[]): Entity[] {
  const entities: Entity[] = [];
  let i = 0;
  while (i < tokens.length) {
    const text = tokens[i].text;
    const startsRun = isWord(text) && isCapitalized(text) &&
      !DETERMINERS.has(text.toLowerCase()) &&
      !PREPOSITIONS.has(text.toLowerCase()) &&
      !CONJUNCTIONS.has(text.toLowerCase()) &&
      !HONORIFICS.has(text.toLowerCase().replace(/\.$/, ""));
    if (!startsRun) {
      i += 1;
      continue;
    }
    let j = i;
    while (j + 1 < tokens.length && isWord(tokens[j + 1].text) &&
           isCapitalized(tokens[j + 1].text)) {
      j += 1;
    }
    const first = tokens[i].text.toLowerCase();
    const prev = i > 0 ? tokens[i - 1].text.toLowerCase().replace(/\.$/, "") : "";
    const sentenceInitial = i === 0;

    let label: string | null = null;
    if (HONORIFICS.has(prev) || PERSON_NAMES.has(first)) {
      label = "PERSON";
    } else if (GPE_PREPOSITIONS.has(prev)) {
      label = "GPE";
    } else if (!sentenceInitial) {
      label = "PERSON";
    }
    if (label !== null) {
      entities.push({ start_token: i + 1, end_token: j + 1, label });
    }
    i = j + 1;
  }
  return entities;
}
