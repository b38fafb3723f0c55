import { readFileSync } from "node:fs";

import { writeFileAtomic } from "./atomic.js";
import { LexicalDatabase, SynonymMode } from "./lexical.js";

/** Everything a run needs to be reproduced: which encoder, which prompt
 * template, which classes, and where the files went. */
export interface ExportManifest {
  encoderId: string;
  template: string;
  classes: string[];
  synonymMode: SynonymMode;
  outputs: Record<string, string>;
}

export const DEFAULT_TEMPLATE = "a photo of a {}";

export function applyTemplate(template: string, name: string): string {
  if (!template.includes("{}")) {
    throw new Error(`template ${JSON.stringify(template)} has no {} slot`);
  }
  return template.split("{}").join(name.replace(/_/g, " "));
}

/** Every class must resolve to at least one synset; failures abort with
 * the full listing so one run reports every bad name at once. */
export function assertClassesResolve(
  classes: readonly string[],
  db: LexicalDatabase,
): void {
  const missing = classes.filter((c) => db.resolve(c).length === 0);
  if (missing.length > 0) {
    throw new Error(`unresolvable class names: ${missing.join(", ")}`);
  }
}

export function writeManifest(path: string, manifest: ExportManifest): void {
  writeFileAtomic(path, JSON.stringify(manifest, null, 2) + "\n");
}

export function readManifest(path: string): ExportManifest {
  return JSON.parse(readFileSync(path, "utf8")) as ExportManifest;
}
