import { readFileSync } from "node:fs";

/** One synset of the lexical database: an id, its member lemmas, and the
 * parent synset in the hypernym hierarchy (null at the root). */
export interface Synset {
  id: string;
  lemmas: string[];
  parent: string | null;
}

export type SynonymMode = "first-synset" | "all-synsets";

/** An in-memory hypernym hierarchy loaded from a JSON array of synsets.
 * Lookup is by normalized lemma; a lemma may belong to several synsets. */
export class LexicalDatabase {
  private byId = new Map<string, Synset>();
  private byLemma = new Map<string, Synset[]>();

  constructor(synsets: Synset[]) {
    for (const s of synsets) {
      if (this.byId.has(s.id)) {
        throw new Error(`duplicate synset id ${s.id}`);
      }
      this.byId.set(s.id, s);
      for (const lemma of s.lemmas) {
        const key = normalizeLemma(lemma);
        const bucket = this.byLemma.get(key);
        if (bucket) bucket.push(s);
        else this.byLemma.set(key, [s]);
      }
    }
    for (const s of synsets) {
      if (s.parent !== null && !this.byId.has(s.parent)) {
        throw new Error(`synset ${s.id} names missing parent ${s.parent}`);
      }
    }
  }

  static fromFile(path: string): LexicalDatabase {
    return new LexicalDatabase(JSON.parse(readFileSync(path, "utf8")) as Synset[]);
  }

  get(id: string): Synset {
    const s = this.byId.get(id);
    if (!s) throw new Error(`unknown synset ${id}`);
    return s;
  }

  /** All synsets containing the name as a lemma, in file order. */
  resolve(name: string): Synset[] {
    return this.byLemma.get(normalizeLemma(name)) ?? [];
  }

  /** The synset a class name is anchored to: the first match. */
  resolveClass(name: string): Synset | undefined {
    return this.resolve(name)[0];
  }

  /** Synonyms for a class name under the given cutoff mode. */
  synonymsFor(name: string, mode: SynonymMode): string[] {
    const synsets = mode === "first-synset" ? this.resolve(name).slice(0, 1) : this.resolve(name);
    const seen = new Set<string>();
    const out: string[] = [];
    for (const s of synsets) {
      for (const lemma of s.lemmas) {
        const key = normalizeLemma(lemma);
        if (!seen.has(key)) {
          seen.add(key);
          out.push(lemma);
        }
      }
    }
    return out;
  }

  /** Hypernym chain from the synset up to and including its root. */
  pathToRoot(id: string): Synset[] {
    const path: Synset[] = [];
    const visited = new Set<string>();
    let cur: Synset | null = this.get(id);
    while (cur) {
      if (visited.has(cur.id)) {
        throw new Error(`hypernym cycle through ${cur.id}`);
      }
      visited.add(cur.id);
      path.push(cur);
      cur = cur.parent === null ? null : this.get(cur.parent);
    }
    return path;
  }
}

export function normalizeLemma(name: string): string {
  return name.trim().toLowerCase().replace(/[\s-]+/g, "_");
}
