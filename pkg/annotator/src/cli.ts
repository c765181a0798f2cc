#!/usr/bin/env node
/** `ea-annotate --in <dir> --out <dir>`: batch-annotate summary text files. */

import { annotateCorpus } from "./annotate.js";
import { PIPELINE_VERSION } from "./pipeline.js";

function parseArgs(argv: string[]): { inDir: string; outDir: string } {
  let inDir: string | undefined;
  let outDir: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case "--in":
        inDir = argv[++i];
        break;
      case "--out":
        outDir = argv[++i];
        break;
      case "--version":
        console.log(PIPELINE_VERSION);
        process.exit(0);
        break;
      case "--help":
        console.log("usage: ea-annotate --in <dir> --out <dir>");
        process.exit(0);
        break;
      default:
        console.error(`unknown argument: ${argv[i]}`);
        process.exit(1);
    }
  }
  if (!inDir || !outDir) {
    console.error("usage: ea-annotate --in <dir> --out <dir>");
    process.exit(1);
  }
  return { inDir: inDir!, outDir: outDir! };
}

export async function main(argv: string[]): Promise<number> {
  const { inDir, outDir } = parseArgs(argv);
  const result = await annotateCorpus(inDir, outDir);
  console.log(
    `annotated ${result.written} files, skipped ${result.skipped} unchanged`);
  if (result.failures.length > 0) {
    for (const f of result.failures) {
      console.error(`FAILED: ${f.file}: ${f.error}`);
    }
    return 1;
  }
  return 0;
}

main(process.argv.slice(2)).then(
  (code) => process.exit(code),
  (err) => {
    console.error(`error: ${err.message}`);
    process.exit(1);
  },
);
