/**
 * Batch exporter: read a sentence TSV (sent_id, lang, bucket, text), embed
 * every row with the hash encoder, and write a SEMB file the miner's
 * embed-import step accepts unchanged.
 */
import { readFileSync } from "node:fs";

import { hashEmbedOne, resolveModel } from "./hash-encoder.js";
import { writeSemb } from "./semb.js";

export interface SentenceRow {
  sentId: string;
  lang: string;
  bucket: string;
  text: string;
}

export function readSentencesTsv(path: string): SentenceRow[] {
  const rows: SentenceRow[] = [];
  const lines = readFileSync(path, "utf-8").split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i];
    if (line.length === 0) {
      continue;
    }
    const parts = line.split("\t");
    if (parts.length !== 4) {
      throw new Error(`${path}:${i + 1}: expected 4 TSV columns, got ${parts.length}`);
    }
    rows.push({ sentId: parts[0], lang: parts[1], bucket: parts[2], text: parts[3] });
  }
  return rows;
}

export interface ExportResult {
  count: number;
  dim: number;
}

export function exportEmbeddings(inPath: string, outPath: string, model = "hash"): ExportResult {
  const { dim } = resolveModel(model);
  const rows = readSentencesTsv(inPath);
  const vectors = rows.map((row) => hashEmbedOne(row.text, dim));
  writeSemb(outPath, rows.map((row) => row.sentId), vectors);
  return { count: rows.length, dim };
}
