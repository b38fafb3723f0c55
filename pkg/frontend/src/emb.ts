import { readFileSync } from "node:fs";

import { writeFileAtomic } from "./atomic.js";

const MAGIC = Buffer.from("EMB1", "ascii");
const HEADER_BYTES = 12;

/** Serialize a matrix (array of equal-length rows) into the binary
 * embedding format: 4-byte magic, u32 row count, u32 dimension, then
 * float32 values row-major, all little-endian. */
export function encodeEmbeddings(rows: readonly (readonly number[])[]): Buffer {
  const n = rows.length;
  const dim = n > 0 ? rows[0].length : 0;
  for (const row of rows) {
    if (row.length !== dim) {
      throw new Error(`ragged matrix: row of length ${row.length}, expected ${dim}`);
    }
  }
  const buf = Buffer.alloc(HEADER_BYTES + n * dim * 4);
  MAGIC.copy(buf, 0);
  buf.writeUInt32LE(n, 4);
  buf.writeUInt32LE(dim, 8);
  let offset = HEADER_BYTES;
  for (const row of rows) {
    for (const v of row) {
      if (!Number.isFinite(v)) {
        throw new Error(`non-finite value ${v} in embedding row`);
      }
      buf.writeFloatLE(v, offset);
      offset += 4;
    }
  }
  return buf;
}

export function writeEmbeddings(
  path: string,
  rows: readonly (readonly number[])[],
): void {
  writeFileAtomic(path, encodeEmbeddings(rows));
}

/** Read one record back (used by tests and for stitching exports). */
export function readEmbeddings(path: string): number[][] {
  const buf = readFileSync(path);
  if (buf.length < HEADER_BYTES || !buf.subarray(0, 4).equals(MAGIC)) {
    throw new Error(`${path}: not an embedding file`);
  }
  const n = buf.readUInt32LE(4);
  const dim = buf.readUInt32LE(8);
  if (buf.length !== HEADER_BYTES + n * dim * 4) {
    throw new Error(`${path}: size mismatch for ${n}x${dim}`);
  }
  const out: number[][] = [];
  let offset = HEADER_BYTES;
  for (let i = 0; i < n; i++) {
    const row = new Array<number>(dim);
    for (let j = 0; j < dim; j++) {
      row[j] = buf.readFloatLE(offset);
      offset += 4;
    }
    out.push(row);
  }
  return out;
}

/** One integer per line, matching the core's label loader. */
export function writeLabels(path: string, labels: readonly number[]): void {
  writeFileAtomic(path, labels.map((v) => `${v}\n`).join(""));
}

/** Per-class "start count" row spans over a stacked embedding file. */
export function writeSpanIndex(path: string, counts: readonly number[]): void {
  let start = 0;
  const lines: string[] = [];
  for (const count of counts) {
    lines.push(`${start} ${count}\n`);
    start += count;
  }
  writeFileAtomic(path, lines.join(""));
}

/** Edge list in the core's graph format: "nodes N" then "u v" per line. */
export function writeEdgeList(
  path: string,
  nodeCount: number,
  edges: readonly (readonly [number, number])[],
): void {
  const canon = edges.map(([u, v]) => (u < v ? [u, v] : [v, u]) as [number, number]);
  canon.sort((a, b) => a[0] - b[0] || a[1] - b[1]);
  const lines = [`nodes ${nodeCount}\n`];
  let prev: [number, number] | null = null;
  for (const e of canon) {
    if (prev && prev[0] === e[0] && prev[1] === e[1]) continue;
    lines.push(`${e[0]} ${e[1]}\n`);
    prev = e;
  }
  writeFileAtomic(path, lines.join(""));
}
