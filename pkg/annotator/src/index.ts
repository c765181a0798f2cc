export { annotateCorpus, annotateText, extractSourceText, sha256 } from "./annotate.js";
export { assignHeads, extractEntities, isVerb, PIPELINE_VERSION } from "./pipeline.js";
export {
  AnnotatedSentence,
  AnnotationDocument,
  Entity,
  SchemaError,
  Token,
  validateDocument,
  validateSentence,
} from "./schema.js";
export { splitSentences, tokenizeSentence } from "./tokenize.js";
