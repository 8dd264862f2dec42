"""Sequential stage runner with manifest-based resume.

Stages: ingest -> embed -> index (monolingual only) -> mine -> refine, plus
pivot and sample when configured. Each stage records its parameters, input
digests, and output digests in ``manifest.json``; a rerun skips any stage
whose entry still matches. Manifests carry no timestamps, so identical
configs and inputs reproduce identical bytes.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import evaluation, ivfpq, mining, refine
from .config import RunConfig
from .embeddings import (
    EmbeddingMatrix,
    export_embeddings,
    fetch_remote_embeddings,
    import_embeddings,
)
from .errors import BitextmineError, StageFailure
from .hashembed import hash_embed
from .ingest import ingest
from .records import read_documents, read_sentences, write_sentences

MANIFEST_NAME = "manifest.json"
EFFECTIVE_CONFIG_NAME = "effective_config.json"


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            h.update(block)
    return f"sha256:{h.hexdigest()}"


def _canonical(data) -> str:
    return json.dumps(data, sort_keys=True, ensure_ascii=False)


class Pipeline:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.workdir = cfg.workdir
        self.workdir.mkdir(parents=True, exist_ok=True)
        self.manifest_path = self.workdir / MANIFEST_NAME
        self.manifest = self._load_manifest()

    # paths for stage artifacts

    def path(self, name: str) -> Path:
        return self.workdir / name

    def _load_manifest(self) -> dict:
        config_digest = hashlib.sha256(
            _canonical(self.cfg.effective()).encode("utf-8")
        ).hexdigest()
        if self.manifest_path.exists():
            data = json.loads(self.manifest_path.read_text(encoding="utf-8"))
            if data.get("config_digest") == config_digest:
                return data
        return {"config_digest": config_digest, "seed": self.cfg.seed, "stages": {}}

    def _save_manifest(self) -> None:
        self.manifest_path.write_text(
            json.dumps(self.manifest, sort_keys=True, indent=2, ensure_ascii=False)
            + "\n",
            encoding="utf-8",
        )

    def _fresh(self, name: str, inputs: dict, params: dict) -> bool:
        entry = self.manifest["stages"].get(name)
        if entry is None:
            return False
        if _canonical(entry["params"]) != _canonical(params):
            return False
        if set(entry["inputs"]) != set(inputs):
            return False
        for label, path in inputs.items():
            if not Path(path).exists() or file_digest(path) != entry["inputs"][label]:
                return False
        for rel, digest in entry["outputs"].items():
            out = self.path(rel)
            if not out.exists() or file_digest(out) != digest:
                return False
        return True

    def _record(self, name, inputs, params, outputs, counts) -> None:
        self.manifest["stages"][name] = {
            "params": params,
            "inputs": {label: file_digest(path) for label, path in inputs.items()},
            "outputs": {rel: file_digest(self.path(rel)) for rel in outputs},
            "counts": counts,
        }
        self._save_manifest()

    def run(self) -> dict:
        """Execute every applicable stage; returns {stage: counts} (counts
        ``None`` for stages skipped via manifest match)."""
        (self.workdir / EFFECTIVE_CONFIG_NAME).write_text(
            json.dumps(self.cfg.effective(), sort_keys=True, indent=2, ensure_ascii=False)
            + "\n",
            encoding="utf-8",
        )
        plan = [("ingest", self._stage_ingest), ("embed", self._stage_embed)]
        if self.cfg.mode == "monolingual":
            plan.append(("index", self._stage_index))
        plan.append(("mine", self._stage_mine))
        plan.append(("refine", self._stage_refine))
        if self.cfg.pivot is not None:
            plan.append(("pivot", self._stage_pivot))
        if self.cfg.sample is not None:
            plan.append(("sample", self._stage_sample))
        summary = {}
        for name, stage in plan:
            inputs, params, outputs, runner = stage()
            if self._fresh(name, inputs, params):
                summary[name] = None
                continue
            try:
                counts = runner()
            except StageFailure:
                raise
            except (BitextmineError, OSError, KeyError, ValueError) as exc:
                raise StageFailure(name, f"{type(exc).__name__}: {exc}") from exc
            self._record(name, inputs, params, outputs, counts)
            summary[name] = counts
        return summary

    # stage definitions: each returns (inputs, params, outputs, runner)

    def _stage_ingest(self):
        cfg = self.cfg
        inputs = {
            "src_docs": cfg.inputs["src_docs"],
            "tgt_docs": cfg.inputs["tgt_docs"],
        }
        params = {
            "bucketing": cfg.bucketing,
            "src_lang": cfg.src_lang,
            "tgt_lang": cfg.tgt_lang,
        }
        outputs = ["src_sentences.tsv", "tgt_sentences.tsv", "ingest_report.json"]

        def runner():
            report = {}
            counts = {}
            for side, lang in (("src", cfg.src_lang), ("tgt", cfg.tgt_lang)):
                docs = list(read_documents(inputs[f"{side}_docs"]))
                matching = [d for d in docs if d.lang == lang]
                records, side_report = ingest(matching, bucketing=cfg.bucketing)
                write_sentences(self.path(f"{side}_sentences.tsv"), records)
                side_dict = side_report.to_dict()
                side_dict["docs_wrong_language"] = len(docs) - len(matching)
                report[side] = side_dict
                counts[f"{side}_sentences"] = len(records)
            self.path("ingest_report.json").write_text(
                json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
                encoding="utf-8",
            )
            return counts

        return inputs, params, outputs, runner

    def _stage_embed(self):
        cfg = self.cfg
        emb = cfg.embed
        inputs = {
            "src_sentences": str(self.path("src_sentences.tsv")),
            "tgt_sentences": str(self.path("tgt_sentences.tsv")),
        }
        if emb["mode"] == "import":
            inputs["src_file"] = emb["src_file"]
            inputs["tgt_file"] = emb["tgt_file"]
            inputs["src_file_ids"] = emb["src_file"] + ".ids"
            inputs["tgt_file_ids"] = emb["tgt_file"] + ".ids"
        params = {k: v for k, v in emb.items() if v is not None}
        outputs = [
            "src.semb", "src.semb.ids", "tgt.semb", "tgt.semb.ids",
            "embed_report.json",
        ]

        def runner():
            report = {}
            counts = {}
            for side in ("src", "tgt"):
                records = read_sentences(self.path(f"{side}_sentences.tsv"))
                ids = [r.sent_id for r in records]
                texts = [r.text for r in records]
                if emb["mode"] == "hash":
                    matrix = EmbeddingMatrix(ids, hash_embed(texts, dim=emb["dim"]))
                elif emb["mode"] == "import":
                    full = import_embeddings(emb[f"{side}_file"])
                    try:
                        matrix = full.subset(ids)
                    except KeyError as exc:
                        raise StageFailure(
                            "embed", f"{side}: no embedding for sent_id {exc}"
                        ) from exc
                    matrix = EmbeddingMatrix(
                        matrix.ids, matrix.vectors, renormalized=full.renormalized
                    )
                else:
                    matrix = fetch_remote_embeddings(
                        records, emb["endpoint"], batch_size=emb["batch_size"]
                    )
                export_embeddings(matrix, self.path(f"{side}.semb"))
                report[side] = {
                    "count": matrix.count,
                    "dim": matrix.dim,
                    "renormalized": matrix.renormalized,
                }
                counts[f"{side}_vectors"] = matrix.count
            self.path("embed_report.json").write_text(
                json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
            )
            return counts

        return inputs, params, outputs, runner

    def _stage_index(self):
        cfg = self.cfg
        idx = cfg.index
        inputs = {"src_embeddings": str(self.path("src.semb"))}
        params = {**idx, "seed": cfg.seed}
        outputs = ["index.sivf"]

        def runner():
            matrix = import_embeddings(self.path("src.semb"))
            index = ivfpq.build_index(
                matrix,
                k_clusters=idx["k_clusters"],
                m=idx["m"],
                residual=idx["residual"],
                n_iter=idx["iters"],
                seed=cfg.seed,
                train_rows=idx["train_rows"],
            )
            index.save(self.path("index.sivf"))
            return {"vectors": index.total, "k_clusters": index.k_clusters}

        return inputs, params, outputs, runner

    def _stage_mine(self):
        cfg = self.cfg
        policy = cfg.thresholds
        inputs = {
            "src_embeddings": str(self.path("src.semb")),
            "tgt_embeddings": str(self.path("tgt.semb")),
            "src_sentences": str(self.path("src_sentences.tsv")),
            "tgt_sentences": str(self.path("tgt_sentences.tsv")),
        }
        if cfg.mode == "monolingual":
            inputs["index"] = str(self.path("index.sivf"))
        params = {
            "mode": cfg.mode,
            "threshold": policy.threshold_for(cfg.mode),
            "p": cfg.index["p"],
            "k": cfg.index["k"],
            "workers": cfg.workers,
        }
        outputs = ["pairs_raw.tsv", "near_misses.tsv", "mining_report.json"]

        def runner():
            src_records = read_sentences(self.path("src_sentences.tsv"))
            tgt_records = read_sentences(self.path("tgt_sentences.tsv"))
            src_matrix = import_embeddings(self.path("src.semb"))
            tgt_matrix = import_embeddings(self.path("tgt.semb"))
            if cfg.mode == "comparable":
                result = mining.mine_comparable(
                    src_records, tgt_records, src_matrix, tgt_matrix, policy
                )
            elif cfg.mode == "docpair":
                result = mining.mine_docpair(
                    src_records, tgt_records, src_matrix, tgt_matrix, policy
                )
            else:
                index = ivfpq.IvfPqIndex.load(self.path("index.sivf"))
                result = mining.mine_monolingual(
                    tgt_matrix,
                    index,
                    src_matrix,
                    policy,
                    p=cfg.index["p"],
                    k=cfg.index["k"],
                    workers=cfg.workers,
                )
            records = {r.sent_id: r for r in src_records}
            records.update({r.sent_id: r for r in tgt_records})
            mining.write_pairs(
                self.path("pairs_raw.tsv"), mining.to_rows(result.pairs, records)
            )
            mining.write_pairs(
                self.path("near_misses.tsv"), mining.to_rows(result.near_misses, records)
            )
            self.path("mining_report.json").write_text(
                json.dumps(result.report, sort_keys=True, indent=2) + "\n",
                encoding="utf-8",
            )
            return {"kept": len(result.pairs), "near_misses": len(result.near_misses)}

        return inputs, params, outputs, runner

    def _stage_refine(self):
        cfg = self.cfg
        inputs = {"pairs_raw": str(self.path("pairs_raw.tsv"))}
        if cfg.heldout_dir is not None:
            for path in sorted(Path(cfg.heldout_dir).glob("*.txt")):
                inputs[f"heldout/{path.name}"] = str(path)
        filters = cfg.filters
        params = {
            "min_en_words": filters.min_en_words,
            "langid_enabled": filters.langid_enabled,
            "dedup_enabled": filters.dedup_enabled,
            "heldout": cfg.heldout_dir is not None,
        }
        outputs = ["pairs.tsv", "refine_report.json"]

        def runner():
            rows = mining.read_pairs(
                self.path("pairs_raw.tsv"), cfg.src_lang, cfg.tgt_lang
            )
            heldout = (
                refine.load_heldout(cfg.heldout_dir)
                if cfg.heldout_dir is not None
                else None
            )
            kept, report = refine.refine_pipeline(rows, filters, heldout=heldout)
            mining.write_pairs(self.path("pairs.tsv"), kept)
            self.path("refine_report.json").write_text(
                json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8"
            )
            return {"kept": len(kept), "removed": report["input"] - len(kept)}

        return inputs, params, outputs, runner

    def _stage_pivot(self):
        cfg = self.cfg
        pivot = cfg.pivot
        inputs = {
            "pairs": str(self.path("pairs.tsv")),
            "corpus_b": pivot["corpus_b"],
        }
        params = {"lang_b": pivot["lang_b"], "seed": cfg.seed}
        outputs = ["pivot_pairs.tsv", "pivot_report.json"]

        def runner():
            corpus_a = mining.read_pairs(
                self.path("pairs.tsv"), cfg.src_lang, cfg.tgt_lang
            )
            corpus_b = mining.read_pairs(pivot["corpus_b"], "en", pivot["lang_b"])
            out = refine.pivot_extract(corpus_a, corpus_b, seed=cfg.seed)
            refine.write_pivot_pairs(self.path("pivot_pairs.tsv"), out)
            self.path("pivot_report.json").write_text(
                json.dumps({"groups": len(out)}, sort_keys=True, indent=2) + "\n",
                encoding="utf-8",
            )
            return {"pairs": len(out)}

        return inputs, params, outputs, runner

    def _stage_sample(self):
        cfg = self.cfg
        inputs = {
            "pairs": str(self.path("pairs.tsv")),
            "near_misses": str(self.path("near_misses.tsv")),
        }
        threshold = cfg.thresholds.threshold_for(cfg.mode)
        params = {
            "n_per_band": cfg.sample["n_per_band"],
            "threshold": threshold,
            "seed": cfg.seed,
        }
        outputs = ["annotation.csv", "annotation_key.csv", "sample_report.json"]

        def runner():
            pool = mining.read_pairs(self.path("pairs.tsv"), cfg.src_lang, cfg.tgt_lang)
            pool += mining.read_pairs(
                self.path("near_misses.tsv"), cfg.src_lang, cfg.tgt_lang
            )
            samples, warnings = evaluation.stratified_sample(
                pool, threshold, cfg.sample["n_per_band"], seed=cfg.seed
            )
            evaluation.export_annotation_csv(samples, self.path("annotation.csv"))
            evaluation.export_annotation_key(samples, self.path("annotation_key.csv"))
            batches = samples[-1].batch_id + 1 if samples else 0
            self.path("sample_report.json").write_text(
                json.dumps(
                    {"samples": len(samples), "batches": batches, "warnings": warnings},
                    sort_keys=True,
                    indent=2,
                )
                + "\n",
                encoding="utf-8",
            )
            return {"samples": len(samples), "batches": batches}

        return inputs, params, outputs, runner


def run_pipeline(cfg: RunConfig) -> dict:
    return Pipeline(cfg).run()
