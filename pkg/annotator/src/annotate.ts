/** Document annotation and idempotent batch export. */

import { createHash } from "node:crypto";
import { promises as fs } from "node:fs";
import * as path from "node:path";

import { assignHeads, extractEntities, PIPELINE_VERSION } from "./pipeline.js";
import {
  AnnotatedSentence,
  AnnotationDocument,
  validateDocument,
} from "./schema.js";
import { splitSentences, tokenizeSentence } from "./tokenize.js";

export function sha256(text: string): string {
  return createHash("sha256").update(text, "utf-8").digest("hex");
}

export function annotateText(docId: string, text: string): AnnotationDocument {
  const sentences: AnnotatedSentence[] = [];
  for (const sentence of splitSentences(text)) {
    const raw = tokenizeSentence(sentence);
    if (raw.length === 0) continue;
    const tokens = assignHeads(raw);
    sentences.push({ tokens, entities: extractEntities(tokens) });
  }
  const doc: AnnotationDocument = {
    doc_id: docId,
    pipeline_version: PIPELINE_VERSION,
    source_sha256: sha256(text),
    sentences,
  };
  validateDocument(doc);
  return doc;
}

/** Pull plain text out of an input file: .txt verbatim; .json summary files
 * via their raw_text or sentences[].text fields. */
export function extractSourceText(filename: string, content: string): string {
  if (!filename.endsWith(".json")) return content;
  const data = JSON.parse(content);
  if (typeof data.raw_text === "string") return data.raw_text;
  if (Array.isArray(data.sentences)) {
    return data.sentences
      .map((s: { text?: string }) => s.text ?? "")
      .join(" ");
  }
  throw new Error("json input has neither raw_text nor sentences[].text");
}

async function writeAtomic(target: string, data: string): Promise<void> {
  const tmp = `${target}.tmp-${process.pid}`;
  await fs.writeFile(tmp, data, "utf-8");
  await fs.rename(tmp, target);
}

export interface CorpusResult {
  written: number;
  skipped: number;
  failures: { file: string; error: string }[];
}

/** Annotate every .txt/.json file in inputDir into `<id>.ann.json` files.
 * Unchanged inputs (matching source_sha256 in an existing output) are
 * skipped; files are processed in parallel and written atomically. */
export async function annotateCorpus(
  inputDir: string,
  outputDir: string,
): Promise<CorpusResult> {
  const entries = (await fs.readdir(inputDir))
    .filter((f) => f.endsWith(".txt") || f.endsWith(".json"))
    .sort();
  await fs.mkdir(outputDir, { recursive: true });

  const result: CorpusResult = { written: 0, skipped: 0, failures: [] };
  await Promise.all(entries.map(async (name) => {
    const docId = name.replace(/\.(txt|json)$/, "");
    const outPath = path.join(outputDir, `${docId}.ann.json`);
    try {
      const content = await fs.readFile(path.join(inputDir, name), "utf-8");
      const text = extractSourceText(name, content);
      const hash = sha256(text);

      try {
        const existing = JSON.parse(await fs.readFile(outPath, "utf-8"));
        if (existing.source_sha256 === hash &&
            existing.pipeline_version === PIPELINE_VERSION) {
          result.skipped += 1;
          return;
        }
      } catch {
        // no reusable output; fall through and annotate
      }

      const doc = annotateText(docId, text);
      await writeAtomic(outPath, JSON.stringify(doc, null, 2) + "\n");
      result.written += 1;
    } catch (e) {
      result.failures.push({ file: name, error: (e as Error).message });
    }
  }));
  return result;
}
