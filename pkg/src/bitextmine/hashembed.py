"""Deterministic hash-based stand-in encoder.

Maps text to a pseudo-random unit vector with no model, no network and no
randomness beyond the text itself, so pipelines and tests run without a real
encoder. An optional *paraphrase key* makes two different texts share a
direction (cosine around 0.96), which is how fixtures plant parallel pairs.

The expansion is fixed and documented so an independent implementation can
reproduce it bit-for-bit:

1. ``seed`` = the first 8 bytes of SHA-256(UTF-8 bytes) read little-endian,
   where the hashed bytes are the paraphrase key if one is given, else the
   text.
2. Component ``i`` (0-based) of the raw vector comes from the splitmix64
   scramble of ``seed + (i+1) * 0x9E3779B97F4A7C15`` (all mod 2**64)::

       z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
       z ^= z >> 27;  z *= 0x94D049BB133111EB
       z ^= z >> 31
       c_i = (z >> 11) * 2.0**-52 - 1.0          # exact in float64, in [-1, 1)

3. Unit-normalize in float64. The squared norm is accumulated strictly in
   index order; every divide and multiply is a single IEEE-754 operation.
4. Without a key the result is step 3 of the text expansion. With a key it is
   ``unit(unit(raw(key)) + 0.2 * unit(raw("\\x1f" + text)))``: the shared
   direction plus a small text-specific offset.
5. The float64 result is rounded once to float32.
"""
from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
PERTURBATION = 0.2
_TEXT_NOISE_PREFIX = "\x1f"


def _seed_of(material: str) -> int:
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def _raw_components(seed: int, dim: int) -> np.ndarray:
    """Splitmix64 expansion of a seed into ``dim`` float64 values in [-1, 1)."""
    idx = np.arange(1, dim + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + idx * np.uint64(GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
        z = z ^ (z >> np.uint64(31))
    mantissa = (z >> np.uint64(11)).astype(np.float64)
    return mantissa * 2.0**-52 - 1.0


def _unit(v: np.ndarray) -> np.ndarray:
    # cumsum fixes the summation order so other implementations can match it.
    norm = np.sqrt(np.cumsum(v * v)[-1])
    return v / norm


def hash_embed_one(text: str, dim: int = 768, key: str | None = None) -> np.ndarray:
    """Embed one text; returns a float32 unit vector of length ``dim``."""
    if key is None:
        return _unit(_raw_components(_seed_of(text), dim)).astype(np.float32)
    base = _unit(_raw_components(_seed_of(key), dim))
    noise = _unit(_raw_components(_seed_of(_TEXT_NOISE_PREFIX + text), dim))
    return _unit(base + PERTURBATION * noise).astype(np.float32)


def hash_embed(
    texts: Sequence[str], dim: int = 768, keys: Sequence[str | None] | None = None
) -> np.ndarray:
    """Embed a batch of texts; rows follow input order."""
    if keys is not None and len(keys) != len(texts):
        raise ValueError(f"{len(keys)} keys for {len(texts)} texts")
    out = np.empty((len(texts), dim), dtype=np.float32)
    for i, text in enumerate(texts):
        key = keys[i] if keys is not None else None
        out[i] = hash_embed_one(text, dim, key)
    return out
