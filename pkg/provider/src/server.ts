/**
 * HTTP embedding service speaking the miner's fetch protocol:
 *
 *   POST /embed  {"texts": ["...", ...]}  ->  {"dim": d, "vectors": [[...]]}
 *   GET  /health                          ->  {"ok": true, "model", "dim"}
 *
 * Malformed requests get 400, oversized batches 413. Vector values are the
 * float32 embeddings widened exactly to float64, so JSON round-trips them
 * without loss.
 */
import { createServer, type IncomingMessage, type Server, type ServerResponse } from "node:http";

import { hashEmbedOne, resolveModel } from "./hash-encoder.js";

export interface EmbedServerOptions {
  model?: string;
  batchLimit?: number;
}

const DEFAULT_BATCH_LIMIT = 512;

function sendJson(res: ServerResponse, status: number, body: unknown): void {
  const payload = JSON.stringify(body);
  res.writeHead(status, {
    "content-type": "application/json",
    "content-length": Buffer.byteLength(payload),
  });
  res.end(payload);
}

function readBody(req: IncomingMessage): Promise<string> {
  return new Promise((resolve, reject) => {
    const chunks: Buffer[] = [];
    req.on("data", (chunk: Buffer) => chunks.push(chunk));
    req.on("end", () => resolve(Buffer.concat(chunks).toString("utf-8")));
    req.on("error", reject);
  });
}

export function createEmbedServer(options: EmbedServerOptions = {}): Server {
  const { name, dim } = resolveModel(options.model ?? "hash");
  const batchLimit = options.batchLimit ?? DEFAULT_BATCH_LIMIT;

  return createServer((req, res) => {
    void handle(req, res);
  });

  async function handle(req: IncomingMessage, res: ServerResponse): Promise<void> {
    const url = (req.url ?? "").split("?")[0];
    if (url === "/health" && req.method === "GET") {
      sendJson(res, 200, { ok: true, model: name, dim });
      return;
    }
    if (url !== "/embed") {
      sendJson(res, 404, { error: "not found" });
      return;
    }
    if (req.method !== "POST") {
      sendJson(res, 405, { error: "POST only" });
      return;
    }
    let texts: unknown;
    try {
      texts = (JSON.parse(await readBody(req)) as { texts?: unknown }).texts;
    } catch {
      sendJson(res, 400, { error: "body is not valid JSON" });
      return;
    }
    if (!Array.isArray(texts) || texts.some((t) => typeof t !== "string")) {
      sendJson(res, 400, { error: 'expected {"texts": [string, ...]}' });
      return;
    }
    if (texts.length > batchLimit) {
      sendJson(res, 413, { error: `batch of ${texts.length} exceeds limit ${batchLimit}` });
      return;
    }
    const vectors = (texts as string[]).map((text) => Array.from(hashEmbedOne(text, dim)));
    sendJson(res, 200, { dim, vectors });
  }
}
