/**
 * SEMB file read/write: the little-endian binary block consumed by the miner.
 *
 *   magic "SEMB" | version u32 | dim u32 | count u64 | dtype u8 (0 = f32)
 *   followed by count x dim float32 values, row-major.
 *
 * A sidecar at <path>.ids carries the newline-delimited ids, one per row.
 */
import { readFileSync, writeFileSync } from "node:fs";

const MAGIC = "SEMB";
const VERSION = 1;
const HEADER_SIZE = 21;

export class FormatError extends Error {}
export class TruncatedFile extends Error {}

export interface SembData {
  ids: string[];
  dim: number;
  /** One Float32Array of length dim per id, in row order. */
  vectors: Float32Array[];
}

export function idsPath(path: string): string {
  return path + ".ids";
}

export function writeSemb(path: string, ids: string[], vectors: Float32Array[]): void {
  if (ids.length !== vectors.length) {
    throw new FormatError(`${ids.length} ids for ${vectors.length} vectors`);
  }
  const dim = vectors.length > 0 ? vectors[0].length : 0;
  const header = Buffer.alloc(HEADER_SIZE);
  header.write(MAGIC, 0, "ascii");
  header.writeUInt32LE(VERSION, 4);
  header.writeUInt32LE(dim, 8);
  header.writeBigUInt64LE(BigInt(vectors.length), 12);
  header.writeUInt8(0, 20);

  const body = Buffer.alloc(vectors.length * dim * 4);
  for (let row = 0; row < vectors.length; row++) {
    if (vectors[row].length !== dim) {
      throw new FormatError(`row ${row} has dim ${vectors[row].length}, expected ${dim}`);
    }
    for (let j = 0; j < dim; j++) {
      body.writeFloatLE(vectors[row][j], (row * dim + j) * 4);
    }
  }
  writeFileSync(path, Buffer.concat([header, body]));
  writeFileSync(idsPath(path), ids.map((sid) => sid + "\n").join(""), "utf-8");
}

export function readSemb(path: string): SembData {
  const raw = readFileSync(path);
  if (raw.length < HEADER_SIZE) {
    throw new TruncatedFile(`${path}: shorter than the SEMB header`);
  }
  if (raw.toString("ascii", 0, 4) !== MAGIC) {
    throw new FormatError(`${path}: bad magic`);
  }
  const version = raw.readUInt32LE(4);
  if (version !== VERSION) {
    throw new FormatError(`${path}: unsupported version ${version}`);
  }
  const dim = raw.readUInt32LE(8);
  const count = Number(raw.readBigUInt64LE(12));
  const dtype = raw.readUInt8(20);
  if (dtype !== 0) {
    throw new FormatError(`${path}: unsupported dtype code ${dtype}`);
  }
  const expected = HEADER_SIZE + count * dim * 4;
  if (raw.length < expected) {
    throw new TruncatedFile(`${path}: expected ${expected} bytes, found ${raw.length}`);
  }
  const vectors: Float32Array[] = [];
  for (let row = 0; row < count; row++) {
    const vec = new Float32Array(dim);
    for (let j = 0; j < dim; j++) {
      vec[j] = raw.readFloatLE(HEADER_SIZE + (row * dim + j) * 4);
    }
    vectors.push(vec);
  }
  const ids = readFileSync(idsPath(path), "utf-8").split("\n").filter((line) => line.length > 0);
  if (ids.length !== count) {
    throw new FormatError(`${idsPath(path)}: ${ids.length} ids for ${count} vectors`);
  }
  return { ids, dim, vectors };
}
