export { writeFileAtomic } from "./atomic.js";
export {
  encodeEmbeddings,
  readEmbeddings,
  writeEdgeList,
  writeEmbeddings,
  writeLabels,
  writeSpanIndex,
} from "./emb.js";
export { Encoder, loadEncoder, MockEncoder } from "./encoder.js";
export { exportGraph, buildClassSubtree, GraphExport } from "./graph.js";
export { exportImages, ImageExport } from "./images.js";
export {
  LexicalDatabase,
  normalizeLemma,
  Synset,
  SynonymMode,
} from "./lexical.js";
export {
  applyTemplate,
  assertClassesResolve,
  DEFAULT_TEMPLATE,
  ExportManifest,
  readManifest,
  writeManifest,
} from "./manifest.js";
export { exportText, TextExport } from "./text.js";
