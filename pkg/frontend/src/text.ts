import { join } from "node:path";

import { writeEmbeddings, writeSpanIndex } from "./emb.js";
import { Encoder } from "./encoder.js";
import { LexicalDatabase } from "./lexical.js";
import { applyTemplate, assertClassesResolve, ExportManifest } from "./manifest.js";

export interface TextExport {
  prompts: string[][];
  counts: number[];
  files: { embeddings: string; index: string };
}

/** Embed every synonym of every class through the prompt template. Rows are
 * grouped per class in class order; the span index says which rows belong
 * to which class, exactly as the core's synonym loader expects. */
export async function exportText(
  manifest: ExportManifest,
  db: LexicalDatabase,
  encoder: Encoder,
  outDir: string,
): Promise<TextExport> {
  assertClassesResolve(manifest.classes, db);
  const prompts: string[][] = manifest.classes.map((name) =>
    db
      .synonymsFor(name, manifest.synonymMode)
      .map((syn) => applyTemplate(manifest.template, syn)),
  );
  const flat = prompts.flat();
  const rows = await encoder.encodeText(flat);

  const files = {
    embeddings: join(outDir, "synonyms.emb"),
    index: join(outDir, "synonyms.idx"),
  };
  writeEmbeddings(files.embeddings, rows);
  const counts = prompts.map((group) => group.length);
  writeSpanIndex(files.index, counts);
  return { prompts, counts, files };
}
