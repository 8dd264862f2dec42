import type { Server } from "node:http";
import type { AddressInfo } from "node:net";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { hashEmbed } from "../src/hash-encoder.js";
import { createEmbedServer } from "../src/server.js";

const DIM = 64;
let server: Server;
let base: string;

function listen(srv: Server): Promise<string> {
  return new Promise((resolve) => {
    srv.listen(0, "127.0.0.1", () => {
      const { port } = srv.address() as AddressInfo;
      resolve(`http://127.0.0.1:${port}`);
    });
  });
}

beforeAll(async () => {
  server = createEmbedServer({ model: `hash-${DIM}`, batchLimit: 100 });
  base = await listen(server);
});

afterAll(() => {
  server.close();
});

describe("embed service", () => {
  it("reports health with model and dim", async () => {
    const res = await fetch(`${base}/health`);
    expect(res.status).toBe(200);
    expect(await res.json()).toEqual({ ok: true, model: `hash-${DIM}`, dim: DIM });
  });

  it("matches direct batch embedding within 1e-6 on 50 texts", async () => {
    const texts = Array.from({ length: 50 }, (_, i) => `service parity sentence ${i} of fifty.`);
    const res = await fetch(`${base}/embed`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ texts }),
    });
    expect(res.status).toBe(200);
    const body = (await res.json()) as { dim: number; vectors: number[][] };
    expect(body.dim).toBe(DIM);
    expect(body.vectors).toHaveLength(50);

    const local = hashEmbed(texts, DIM);
    let worst = 0;
    body.vectors.forEach((vec, i) => {
      expect(vec).toHaveLength(DIM);
      vec.forEach((x, j) => {
        worst = Math.max(worst, Math.abs(x - local[i][j]));
      });
    });
    expect(worst).toBeLessThanOrEqual(1e-6);
  });

  it("rejects malformed bodies with 400", async () => {
    const notJson = await fetch(`${base}/embed`, { method: "POST", body: "{nope" });
    expect(notJson.status).toBe(400);

    const wrongShape = await fetch(`${base}/embed`, {
      method: "POST",
      body: JSON.stringify({ texts: "just one string" }),
    });
    expect(wrongShape.status).toBe(400);

    const nonStrings = await fetch(`${base}/embed`, {
      method: "POST",
      body: JSON.stringify({ texts: ["ok", 5] }),
    });
    expect(nonStrings.status).toBe(400);
  });

  it("rejects oversized batches with 413", async () => {
    const res = await fetch(`${base}/embed`, {
      method: "POST",
      body: JSON.stringify({ texts: Array.from({ length: 101 }, () => "x") }),
    });
    expect(res.status).toBe(413);
  });

  it("404s unknown paths and 405s non-POST embeds", async () => {
    expect((await fetch(`${base}/nowhere`)).status).toBe(404);
    expect((await fetch(`${base}/embed`)).status).toBe(405);
  });
});
