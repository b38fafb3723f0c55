import { readdirSync, statSync } from "node:fs";
import { join } from "node:path";

import { writeFileAtomic } from "./atomic.js";
import { writeEmbeddings, writeLabels } from "./emb.js";
import { Encoder } from "./encoder.js";

export interface ImageExport {
  classNames: string[];
  rowCount: number;
  skipped: { path: string; reason: string }[];
  files: { embeddings: string; labels: string; skipped: string };
}

/** Encode every image under ``imageDir/<class-name>/...`` in sorted
 * directory order. Unreadable files are skipped with a warning and land in
 * the skip list instead of aborting the batch. */
export async function exportImages(
  imageDir: string,
  encoder: Encoder,
  outDir: string,
  warn: (msg: string) => void = (msg) => console.warn(msg),
): Promise<ImageExport> {
  const classNames = readdirSync(imageDir)
    .filter((name) => statSync(join(imageDir, name)).isDirectory())
    .sort();
  if (classNames.length === 0) {
    warn(`no class directories under ${imageDir}; writing an empty export`);
  }

  const rows: number[][] = [];
  const labels: number[] = [];
  const skipped: { path: string; reason: string }[] = [];
  for (let k = 0; k < classNames.length; k++) {
    const dir = join(imageDir, classNames[k]);
    const entries = readdirSync(dir)
      .filter((name) => statSync(join(dir, name)).isFile())
      .sort();
    for (const name of entries) {
      const path = join(dir, name);
      try {
        rows.push(await encoder.encodeImageFile(path));
        labels.push(k);
      } catch (err) {
        const reason = err instanceof Error ? err.message : String(err);
        warn(`skipping unreadable image ${path}: ${reason}`);
        skipped.push({ path, reason });
      }
    }
  }

  const files = {
    embeddings: join(outDir, "images.emb"),
    labels: join(outDir, "image_labels.txt"),
    skipped: join(outDir, "skipped.txt"),
  };
  writeEmbeddings(files.embeddings, rows);
  writeLabels(files.labels, labels);
  writeFileAtomic(
    files.skipped,
    skipped.map((s) => `${s.path}\t${s.reason}\n`).join(""),
  );
  return { classNames, rowCount: rows.length, skipped, files };
}
