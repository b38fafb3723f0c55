import { copyFileSync, mkdirSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { readEmbeddings } from "../src/emb.js";
import { Encoder, MockEncoder } from "../src/encoder.js";
import { exportImages } from "../src/images.js";

function tmp(prefix = "img-"): string {
  return mkdtempSync(join(tmpdir(), prefix));
}

const encoder = new MockEncoder(8);

/** Same as the mock but refusing anything with a .corrupt suffix, standing
 * in for decode failures on damaged files. */
const flakyEncoder: Encoder = {
  id: "mock-flaky-8",
  dim: 8,
  encodeText: (texts) => encoder.encodeText(texts),
  async encodeImageFile(path: string): Promise<number[]> {
    if (path.endsWith(".corrupt")) throw new Error("undecodable image data");
    return encoder.encodeImageFile(path);
  },
};

describe("image export", () => {
  it("an empty directory yields a 0-row file and a warning", async () => {
    const src = tmp();
    const out = tmp("out-");
    const warnings: string[] = [];
    const res = await exportImages(src, encoder, out, (m) => warnings.push(m));
    expect(res.rowCount).toBe(0);
    expect(res.classNames).toEqual([]);
    expect(warnings.length).toBe(1);
    expect(readEmbeddings(res.files.embeddings)).toEqual([]);
    expect(readFileSync(res.files.labels, "utf8")).toBe("");
  });

  it("the same image twice produces two identical rows", async () => {
    const src = tmp();
    mkdirSync(join(src, "zebra"));
    writeFileSync(join(src, "zebra", "a.png"), Buffer.from([9, 9, 9, 1, 2, 3]));
    copyFileSync(join(src, "zebra", "a.png"), join(src, "zebra", "b.png"));
    const res = await exportImages(src, encoder, tmp("out-"));
    const rows = readEmbeddings(res.files.embeddings);
    expect(rows.length).toBe(2);
    expect(rows[0]).toEqual(rows[1]);
  });

  it("labels follow sorted class directories, files in sorted order", async () => {
    const src = tmp();
    for (const [cls, files] of [
      ["wolf", ["x.png"]],
      ["ant", ["b.png", "a.png"]],
    ] as const) {
      mkdirSync(join(src, cls));
      for (const f of files) writeFileSync(join(src, cls, f), `${cls}/${f}`);
    }
    const res = await exportImages(src, encoder, tmp("out-"));
    expect(res.classNames).toEqual(["ant", "wolf"]);
    expect(readFileSync(res.files.labels, "utf8")).toBe("0\n0\n1\n");
  });

  it("skips undecodable files, warns, and records them", async () => {
    const src = tmp();
    mkdirSync(join(src, "cat"));
    writeFileSync(join(src, "cat", "good.png"), "fine");
    writeFileSync(join(src, "cat", "bad.corrupt"), "variance");
    const warnings: string[] = [];
    const res = await exportImages(src, flakyEncoder, tmp("out-"), (m) =>
      warnings.push(m),
    );
    expect(res.rowCount).toBe(1);
    expect(res.skipped.length).toBe(1);
    expect(res.skipped[0].path.endsWith("bad.corrupt")).toBe(true);
    expect(warnings.some((w) => w.includes("bad.corrupt"))).toBe(true);
    const skipText = readFileSync(res.files.skipped, "utf8");
    expect(skipText).toContain("bad.corrupt\tundecodable image data");
    // accounting: rows written + skips = files present
    expect(res.rowCount + res.skipped.length).toBe(2);
  });

  it("row count always equals file count minus skips", async () => {
    const src = tmp();
    let total = 0;
    for (const cls of ["a", "b", "c"]) {
      mkdirSync(join(src, cls));
      for (let i = 0; i < 4; i++) {
        const bad = (total + i) % 3 === 0;
        writeFileSync(join(src, cls, `f${i}.${bad ? "corrupt" : "png"}`), `${cls}${i}`);
      }
      total += 4;
    }
    const res = await exportImages(src, flakyEncoder, tmp("out-"), () => {});
    expect(res.rowCount + res.skipped.length).toBe(total);
    expect(readEmbeddings(res.files.embeddings).length).toBe(res.rowCount);
  });
});
