import { readFileSync } from "node:fs";

/** Anything that can turn prompts and image files into fixed-width rows.
 * Real encoders load big pretrained weights; the mock is pure arithmetic
 * so the exporter and its tests run anywhere. */
export interface Encoder {
  readonly id: string;
  readonly dim: number;
  encodeText(texts: readonly string[]): Promise<number[][]>;
  encodeImageFile(path: string): Promise<number[]>;
}

function fnv1a(bytes: Uint8Array, seed: number): number {
  let h = (0x811c9dc5 ^ seed) >>> 0;
  for (const b of bytes) {
    h ^= b;
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function hashedUnitVector(bytes: Uint8Array, dim: number): number[] {
  const rand = mulberry32(fnv1a(bytes, 0));
  const row = new Array<number>(dim);
  let normSq = 0;
  for (let i = 0; i < dim; i++) {
    // Box-Muller from two uniforms keeps the direction isotropic
    const u = Math.max(rand(), 1e-12);
    const v = rand();
    const g = Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
    row[i] = g;
    normSq += g * g;
  }
  const norm = Math.sqrt(normSq);
  for (let i = 0; i < dim; i++) row[i] /= norm;
  return row;
}

/** Deterministic stand-in encoder: every string or byte payload maps to a
 * fixed unit vector derived from its hash. Same input, same row, forever. */
export class MockEncoder implements Encoder {
  readonly id: string;
  readonly dim: number;

  constructor(dim = 32) {
    this.dim = dim;
    this.id = `mock-hash-${dim}`;
  }

  async encodeText(texts: readonly string[]): Promise<number[][]> {
    return texts.map((t) => hashedUnitVector(new TextEncoder().encode(t), this.dim));
  }

  async encodeImageFile(path: string): Promise<number[]> {
    const bytes = readFileSync(path); // throws on unreadable files
    return hashedUnitVector(bytes, this.dim);
  }
}

/** Resolve an encoder id. "mock-hash-<dim>" needs nothing installed; any
 * other id is treated as a pretrained vision-language model name and loaded
 * through the transformers runtime, with load failures surfaced verbatim. */
export async function loadEncoder(id: string): Promise<Encoder> {
  const mock = /^mock-hash-(\d+)$/.exec(id);
  if (mock) return new MockEncoder(parseInt(mock[1], 10));

  const transformers = await import(
    /* @vite-ignore */ "@xenova/transformers" as string
  );
  const extractor = await transformers.pipeline("feature-extraction", id);
  const probe = await extractor("probe", { pooling: "mean", normalize: true });
  const dim = probe.data.length as number;
  return {
    id,
    dim,
    async encodeText(texts: readonly string[]): Promise<number[][]> {
      const out: number[][] = [];
      for (const t of texts) {
        const res = await extractor(t, { pooling: "mean", normalize: true });
        out.push(Array.from(res.data as Float32Array));
      }
      return out;
    },
    async encodeImageFile(path: string): Promise<number[]> {
      const imager = await transformers.pipeline("image-feature-extraction", id);
      const res = await imager(path);
      return Array.from(res.data as Float32Array);
    },
  };
}
