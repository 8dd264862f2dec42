"""Run configuration: one JSON file, CLI overrides, validated up front.

A run is a single language pair mined in one mode. Bucketing is derived from
the mode (comparable -> month, docpair -> document_pair, monolingual ->
global) rather than configured separately. Every run writes an
effective-config snapshot so outputs are reproducible from the workdir alone.
"""
from __future__ import annotations

import copy
import json
import re
from pathlib import Path

from .errors import ConfigError
from .mining import MODES, ThresholdPolicy
from .refine import FilterConfig

BUCKETING_BY_MODE = {
    "comparable": "month",
    "docpair": "document_pair",
    "monolingual": "global",
}

EMBED_MODES = ("import", "fetch", "hash")

DEFAULTS = {
    "languages": ["en", "hi"],
    "src_lang": "en",
    "tgt_lang": "hi",
    "mode": "comparable",
    "seed": 0,
    "workers": 1,
    "workdir": "run",
    "inputs": {"src_docs": None, "tgt_docs": None},
    "thresholds": {"comparable": 0.75, "docpair": 0.75, "monolingual": 0.80},
    "index": {
        "k_clusters": None,
        "m": 8,
        "p": 16,
        "k": 1,
        "residual": True,
        "iters": 20,
        "train_rows": None,
    },
    "filters": {
        "min_en_words": 4,
        "langid_enabled": True,
        "dedup_enabled": True,
    },
    "embed": {
        "mode": "hash",
        "dim": 768,
        "endpoint": None,
        "batch_size": 64,
        "src_file": None,
        "tgt_file": None,
    },
    "heldout_dir": None,
    "pivot": None,  # {"corpus_b": path, "lang_b": code}
    "sample": None,  # {"n_per_band": int}
}

_LANG_RE = re.compile(r"^[a-z]{2,3}$")


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key: {where}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            out[key] = _merge(base[key], value, where)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _set_dotted(data: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = data
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot override through non-section key: {dotted}")
    node[keys[-1]] = value


def parse_override(raw: str):
    """``key.path=value`` with the value parsed as JSON when possible."""
    if "=" not in raw:
        raise ConfigError(f"override must look like key=value, got: {raw}")
    key, text = raw.split("=", 1)
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    return key.strip(), value


class RunConfig:
    def __init__(self, data: dict):
        self.data = _merge(DEFAULTS, data)
        self._validate()

    @classmethod
    def load(cls, path, overrides=None, seed=None) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}")
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        for dotted, value in overrides or []:
            _set_dotted(raw, dotted, value)
        if seed is not None:
            raw["seed"] = seed
        return cls(raw)

    def _fail(self, message: str):
        raise ConfigError(message)

    def _validate(self) -> None:
        d = self.data
        langs = d["languages"]
        if not isinstance(langs, list) or not langs:
            self._fail("languages must be a nonempty list")
        for lang in langs:
            if not isinstance(lang, str) or not _LANG_RE.match(lang):
                self._fail(f"bad language code: {lang!r}")
        for side in ("src_lang", "tgt_lang"):
            if d[side] not in langs:
                self._fail(f"{side} {d[side]!r} not in languages {langs}")
        if d["src_lang"] == d["tgt_lang"]:
            self._fail("src_lang and tgt_lang must differ")
        if d["mode"] not in MODES:
            self._fail(f"mode must be one of {MODES}, got {d['mode']!r}")
        if not isinstance(d["seed"], int) or d["seed"] < 0:
            self._fail("seed must be a nonnegative integer")
        if not isinstance(d["workers"], int) or d["workers"] < 1:
            self._fail("workers must be a positive integer")
        self.thresholds  # construction validates ranges
        self.filters
        idx = d["index"]
        for key in ("m", "p", "k", "iters"):
            if not isinstance(idx[key], int) or idx[key] < 1:
                self._fail(f"index.{key} must be a positive integer")
        for key in ("k_clusters", "train_rows"):
            if idx[key] is not None and (not isinstance(idx[key], int) or idx[key] < 1):
                self._fail(f"index.{key} must be a positive integer or null")
        emb = d["embed"]
        if emb["mode"] not in EMBED_MODES:
            self._fail(f"embed.mode must be one of {EMBED_MODES}")
        if not isinstance(emb["dim"], int) or emb["dim"] < 1:
            self._fail("embed.dim must be a positive integer")
        if emb["mode"] == "fetch" and not emb["endpoint"]:
            self._fail("embed.mode=fetch requires embed.endpoint")
        if emb["mode"] == "import":
            for key in ("src_file", "tgt_file"):
                if not emb[key]:
                    self._fail(f"embed.mode=import requires embed.{key}")
                if not Path(emb[key]).exists():
                    self._fail(f"embed.{key} does not exist: {emb[key]}")
        for side in ("src_docs", "tgt_docs"):
            path = d["inputs"][side]
            if not path:
                self._fail(f"inputs.{side} is required")
            if not Path(path).exists():
                self._fail(f"inputs.{side} does not exist: {path}")
        if d["heldout_dir"] is not None and not Path(d["heldout_dir"]).is_dir():
            self._fail(f"heldout_dir does not exist: {d['heldout_dir']}")
        pivot = d["pivot"]
        if pivot is not None:
            if not isinstance(pivot, dict) or set(pivot) != {"corpus_b", "lang_b"}:
                self._fail("pivot must be {corpus_b, lang_b}")
            if not Path(pivot["corpus_b"]).exists():
                self._fail(f"pivot.corpus_b does not exist: {pivot['corpus_b']}")
            if not _LANG_RE.match(str(pivot["lang_b"])):
                self._fail(f"bad pivot.lang_b: {pivot['lang_b']!r}")
        sample = d["sample"]
        if sample is not None:
            if not isinstance(sample, dict) or set(sample) != {"n_per_band"}:
                self._fail("sample must be {n_per_band}")
            if not isinstance(sample["n_per_band"], int) or sample["n_per_band"] < 1:
                self._fail("sample.n_per_band must be a positive integer")

    # typed accessors

    @property
    def languages(self) -> list:
        return list(self.data["languages"])

    @property
    def src_lang(self) -> str:
        return self.data["src_lang"]

    @property
    def tgt_lang(self) -> str:
        return self.data["tgt_lang"]

    @property
    def mode(self) -> str:
        return self.data["mode"]

    @property
    def bucketing(self) -> str:
        return BUCKETING_BY_MODE[self.mode]

    @property
    def seed(self) -> int:
        return self.data["seed"]

    @property
    def workers(self) -> int:
        return self.data["workers"]

    @property
    def workdir(self) -> Path:
        return Path(self.data["workdir"])

    @property
    def thresholds(self) -> ThresholdPolicy:
        return ThresholdPolicy(**self.data["thresholds"])

    @property
    def filters(self) -> FilterConfig:
        f = self.data["filters"]
        return FilterConfig(
            min_en_words=f["min_en_words"],
            langid_enabled=f["langid_enabled"],
            dedup_enabled=f["dedup_enabled"],
            rng_seed=self.seed,
        )

    @property
    def index(self) -> dict:
        return dict(self.data["index"])

    @property
    def embed(self) -> dict:
        return dict(self.data["embed"])

    @property
    def inputs(self) -> dict:
        return dict(self.data["inputs"])

    @property
    def heldout_dir(self):
        return self.data["heldout_dir"]

    @property
    def pivot(self):
        return self.data["pivot"]

    @property
    def sample(self):
        return self.data["sample"]

    def effective(self) -> dict:
        return copy.deepcopy(self.data)
