import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { hashEmbed } from "../src/hash-encoder.js";
import { FormatError, readSemb, TruncatedFile, writeSemb } from "../src/semb.js";

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "semb-"));
}

describe("semb round trip", () => {
  it("preserves ids, dim, and exact float32 values", () => {
    const dir = tmp();
    const path = join(dir, "vectors.semb");
    const ids = ["en-001#0000", "en-001#0001", "en-002#0000"];
    const vectors = hashEmbed(["alpha", "bravo", "charlie"], 48);
    writeSemb(path, ids, vectors);

    const back = readSemb(path);
    expect(back.ids).toEqual(ids);
    expect(back.dim).toBe(48);
    back.vectors.forEach((vec, i) => {
      expect(Array.from(vec)).toEqual(Array.from(vectors[i]));
    });
  });

  it("writes the documented 21-byte header", () => {
    const dir = tmp();
    const path = join(dir, "vectors.semb");
    writeSemb(path, ["a"], hashEmbed(["a"], 8));
    const raw = readFileSync(path);
    expect(raw.length).toBe(21 + 8 * 4);
    expect(raw.toString("ascii", 0, 4)).toBe("SEMB");
    expect(raw.readUInt32LE(4)).toBe(1);
    expect(raw.readUInt32LE(8)).toBe(8);
    expect(Number(raw.readBigUInt64LE(12))).toBe(1);
    expect(raw.readUInt8(20)).toBe(0);
  });
});

describe("semb validation", () => {
  it("rejects truncated files and bad magic", () => {
    const dir = tmp();
    const short = join(dir, "short.semb");
    writeFileSync(short, Buffer.from("SE"));
    expect(() => readSemb(short)).toThrow(TruncatedFile);

    const bad = join(dir, "bad.semb");
    writeFileSync(bad, Buffer.alloc(21).fill(7));
    expect(() => readSemb(bad)).toThrow(FormatError);

    const path = join(dir, "cut.semb");
    writeSemb(path, ["a", "b"], hashEmbed(["a", "b"], 16));
    const raw = readFileSync(path);
    writeFileSync(path, raw.subarray(0, raw.length - 4));
    expect(() => readSemb(path)).toThrow(TruncatedFile);
  });

  it("rejects an id sidecar that disagrees with the count", () => {
    const dir = tmp();
    const path = join(dir, "vectors.semb");
    writeSemb(path, ["a", "b"], hashEmbed(["a", "b"], 16));
    writeFileSync(path + ".ids", "a\n");
    expect(() => readSemb(path)).toThrow(FormatError);
  });

  it("rejects ragged rows at write time", () => {
    const dir = tmp();
    expect(() =>
      writeSemb(join(dir, "x.semb"), ["a", "b"], [new Float32Array(4), new Float32Array(5)]),
    ).toThrow(FormatError);
  });
});
