import { describe, expect, it } from "vitest";

import {
  cosine,
  hashEmbed,
  hashEmbedOne,
  ModelLoadError,
  resolveModel,
} from "../src/hash-encoder.js";

function norm(v: Float32Array): number {
  let sq = 0;
  for (const x of v) sq += x * x;
  return Math.sqrt(sq);
}

describe("hashEmbedOne", () => {
  it("returns a unit float32 vector of the requested dim", () => {
    const v = hashEmbedOne("a plain sentence", 256);
    expect(v.length).toBe(256);
    expect(Math.abs(norm(v) - 1)).toBeLessThanOrEqual(1e-6);
  });

  it("is deterministic and text-sensitive", () => {
    const a = hashEmbedOne("same text", 64);
    const b = hashEmbedOne("same text", 64);
    const c = hashEmbedOne("other text", 64);
    expect(Array.from(a)).toEqual(Array.from(b));
    expect(Array.from(a)).not.toEqual(Array.from(c));
  });

  it("keyed texts share a direction, unkeyed ones do not", () => {
    const dim = 256;
    const left = hashEmbedOne("first phrasing of the idea", dim, "pair-007");
    const right = hashEmbedOne("second phrasing of the idea", dim, "pair-007");
    expect(cosine(left, right)).toBeGreaterThanOrEqual(0.9);

    const loose = cosine(
      hashEmbedOne("first phrasing of the idea", dim),
      hashEmbedOne("second phrasing of the idea", dim),
    );
    expect(Math.abs(loose)).toBeLessThan(0.5);
  });
});

describe("hashEmbed", () => {
  it("embeds batches in order with per-element keys", () => {
    const rows = hashEmbed(["one", "two"], 32, ["k", undefined]);
    expect(rows).toHaveLength(2);
    expect(Array.from(rows[0])).toEqual(Array.from(hashEmbedOne("one", 32, "k")));
    expect(Array.from(rows[1])).toEqual(Array.from(hashEmbedOne("two", 32)));
  });

  it("rejects mismatched key lists", () => {
    expect(() => hashEmbed(["one", "two"], 32, ["k"])).toThrow(/1 keys for 2 texts/);
  });
});

describe("resolveModel", () => {
  it("accepts hash and hash-<dim>", () => {
    expect(resolveModel("hash")).toEqual({ name: "hash", dim: 768 });
    expect(resolveModel("hash-64")).toEqual({ name: "hash-64", dim: 64 });
  });

  it("refuses anything else", () => {
    for (const model of ["real-encoder", "hash-0", "hash-x", ""]) {
      expect(() => resolveModel(model)).toThrow(ModelLoadError);
    }
  });
});
