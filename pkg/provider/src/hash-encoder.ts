/**
 * Deterministic hash-based encoder, bit-compatible with the Python side.
 *
 * The expansion is fixed: seed = first 8 bytes of SHA-256(utf-8) read
 * little-endian; component i comes from the splitmix64 scramble of
 * seed + (i+1) * GAMMA mapped into [-1, 1); the squared norm is accumulated
 * strictly in index order; keyed embeddings are
 * unit(unit(raw(key)) + 0.2 * unit(raw("\x1f" + text))); the float64 result
 * is rounded once to float32. Every step is a single IEEE-754 operation, so
 * any conforming implementation produces identical bytes.
 */
import { createHash } from "node:crypto";

const GAMMA = 0x9e3779b97f4a7c15n;
const MIX1 = 0xbf58476d1ce4e5b9n;
const MIX2 = 0x94d049bb133111ebn;
const MASK64 = (1n << 64n) - 1n;
const PERTURBATION = 0.2;
const TEXT_NOISE_PREFIX = "\x1f";

export const DEFAULT_DIM = 768;

export class ModelLoadError extends Error {}

export interface ModelSpec {
  name: string;
  dim: number;
}

/** Accepts "hash" (768-d) or "hash-<dim>"; anything else cannot be loaded. */
export function resolveModel(model: string): ModelSpec {
  if (model === "hash") {
    return { name: model, dim: DEFAULT_DIM };
  }
  const match = /^hash-(\d+)$/.exec(model);
  if (match) {
    const dim = Number(match[1]);
    if (dim >= 1) {
      return { name: model, dim };
    }
  }
  throw new ModelLoadError(`unknown model "${model}"; only hash encoders ship here`);
}

function seedOf(material: string): bigint {
  return createHash("sha256").update(material, "utf8").digest().readBigUInt64LE(0);
}

function rawComponents(seed: bigint, dim: number): Float64Array {
  const out = new Float64Array(dim);
  for (let i = 0; i < dim; i++) {
    let z = (seed + BigInt(i + 1) * GAMMA) & MASK64;
    z = ((z ^ (z >> 30n)) * MIX1) & MASK64;
    z = ((z ^ (z >> 27n)) * MIX2) & MASK64;
    z = z ^ (z >> 31n);
    // z >> 11 has 53 bits, so the float64 conversion is exact
    out[i] = Number(z >> 11n) * 2 ** -52 - 1.0;
  }
  return out;
}

function unit(v: Float64Array): Float64Array {
  let sq = 0.0;
  for (let i = 0; i < v.length; i++) {
    sq += v[i] * v[i];
  }
  const norm = Math.sqrt(sq);
  const out = new Float64Array(v.length);
  for (let i = 0; i < v.length; i++) {
    out[i] = v[i] / norm;
  }
  return out;
}

function toFloat32(v: Float64Array): Float32Array {
  const out = new Float32Array(v.length);
  for (let i = 0; i < v.length; i++) {
    out[i] = Math.fround(v[i]);
  }
  return out;
}

/** Embed one text; returns a float32 unit vector of length dim. */
export function hashEmbedOne(text: string, dim = DEFAULT_DIM, key?: string): Float32Array {
  if (key === undefined) {
    return toFloat32(unit(rawComponents(seedOf(text), dim)));
  }
  const base = unit(rawComponents(seedOf(key), dim));
  const noise = unit(rawComponents(seedOf(TEXT_NOISE_PREFIX + text), dim));
  const mixed = new Float64Array(dim);
  for (let i = 0; i < dim; i++) {
    mixed[i] = base[i] + PERTURBATION * noise[i];
  }
  return toFloat32(unit(mixed));
}

/** Embed a batch; rows follow input order. */
export function hashEmbed(
  texts: string[],
  dim = DEFAULT_DIM,
  keys?: (string | undefined)[],
): Float32Array[] {
  if (keys !== undefined && keys.length !== texts.length) {
    throw new Error(`${keys.length} keys for ${texts.length} texts`);
  }
  return texts.map((text, i) => hashEmbedOne(text, dim, keys?.[i]));
}

/** Float64 inner product of two unit vectors. */
export function cosine(a: Float32Array, b: Float32Array): number {
  if (a.length !== b.length) {
    throw new Error(`cosine over lengths ${a.length} vs ${b.length}`);
  }
  let acc = 0.0;
  for (let i = 0; i < a.length; i++) {
    acc += a[i] * b[i];
  }
  return Math.min(1.0, Math.max(-1.0, acc));
}
