"""Command-line interface.

Exit codes: 0 success, 1 configuration/usage error, 2 stage failure. Every
command that draws randomness takes ``--seed``.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import evaluation, ivfpq, mining, refine, stats
from .config import RunConfig, parse_override
from .embeddings import export_embeddings, fetch_remote_embeddings, import_embeddings
from .errors import BitextmineError, ConfigError, StageFailure
from .ingest import ingest
from .pipeline import run_pipeline
from .records import read_documents, read_sentences, write_sentences


class _Parser(argparse.ArgumentParser):
    """argparse reports usage problems as ConfigError so they exit 1."""

    def error(self, message):
        raise ConfigError(message)


def _print_json(data) -> None:
    print(json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False))


def _threshold_policy(mode: str, value):
    if value is None:
        return mining.ThresholdPolicy()
    return mining.ThresholdPolicy(**{mode: value})


def _cmd_ingest(args) -> int:
    docs = list(read_documents(args.docs))
    wrong = 0
    if args.lang is not None:
        kept = [d for d in docs if d.lang == args.lang]
        wrong = len(docs) - len(kept)
        docs = kept
    records, report = ingest(docs, bucketing=args.bucketing)
    write_sentences(args.out, records)
    data = report.to_dict()
    if args.lang is not None:
        data["docs_wrong_language"] = wrong
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            json.dump(data, f, sort_keys=True, indent=2, ensure_ascii=False)
            f.write("\n")
    _print_json(data)
    return 0


def _cmd_embed_import(args) -> int:
    matrix = import_embeddings(args.infile)
    if args.sentences:
        ids = [r.sent_id for r in read_sentences(args.sentences)]
        matrix = matrix.subset(ids)
    if args.out:
        export_embeddings(matrix, args.out)
    _print_json(
        {"count": matrix.count, "dim": matrix.dim, "renormalized": matrix.renormalized}
    )
    return 0


def _cmd_embed_fetch(args) -> int:
    records = read_sentences(args.sentences)
    matrix = fetch_remote_embeddings(records, args.endpoint, batch_size=args.batch_size)
    export_embeddings(matrix, args.out)
    _print_json(
        {"count": matrix.count, "dim": matrix.dim, "renormalized": matrix.renormalized}
    )
    return 0


def _cmd_index_build(args) -> int:
    matrix = import_embeddings(args.embeddings)
    index = ivfpq.build_index(
        matrix,
        k_clusters=args.clusters,
        m=args.m,
        residual=args.residual,
        n_iter=args.iters,
        seed=args.seed,
        train_rows=args.train_rows,
    )
    index.save(args.out)
    _print_json(
        {
            "vectors": index.total,
            "k_clusters": index.k_clusters,
            "m": index.m,
            "dim": index.dim,
            "residual": index.residual,
        }
    )
    return 0


def _cmd_index_query(args) -> int:
    queries = import_embeddings(args.queries)
    if args.exact:
        target = import_embeddings(args.target)
        hit_lists = [
            ivfpq.exact_search(target, queries.vectors[i], k=args.k)
            for i in range(queries.count)
        ]
    else:
        if not args.index:
            raise ConfigError("--index is required unless --exact is given")
        index = ivfpq.IvfPqIndex.load(args.index)
        hit_lists = index.search_batch(
            queries.vectors, p=args.p, k=args.k, workers=args.workers
        )
    for qid, hits in zip(queries.ids, hit_lists):
        for rank, hit in enumerate(hits, start=1):
            print(f"{qid}\t{rank}\t{hit.sent_id}\t{hit.approx_score:.8f}")
    return 0


def _finish_mining(args, result, src_records, tgt_records) -> int:
    records = {r.sent_id: r for r in src_records}
    records.update({r.sent_id: r for r in tgt_records})
    mining.write_pairs(args.out, mining.to_rows(result.pairs, records))
    if args.near_misses:
        mining.write_pairs(
            args.near_misses, mining.to_rows(result.near_misses, records)
        )
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            json.dump(result.report, f, sort_keys=True, indent=2)
            f.write("\n")
    _print_json(result.report)
    return 0


def _cmd_mine_bucketed(args, mode: str) -> int:
    src_records = read_sentences(args.src_sentences)
    tgt_records = read_sentences(args.tgt_sentences)
    src_matrix = import_embeddings(args.src_emb)
    tgt_matrix = import_embeddings(args.tgt_emb)
    policy = _threshold_policy(mode, args.threshold)
    fn = mining.mine_comparable if mode == "comparable" else mining.mine_docpair
    result = fn(src_records, tgt_records, src_matrix, tgt_matrix, policy)
    return _finish_mining(args, result, src_records, tgt_records)


def _cmd_mine_mono(args) -> int:
    src_records = read_sentences(args.src_sentences)
    tgt_records = read_sentences(args.tgt_sentences)
    src_matrix = import_embeddings(args.src_emb)
    tgt_matrix = import_embeddings(args.tgt_emb)
    index = ivfpq.IvfPqIndex.load(args.index)
    policy = _threshold_policy("monolingual", args.threshold)
    result = mining.mine_monolingual(
        tgt_matrix,
        index,
        src_matrix,
        policy,
        p=args.p,
        k=args.k,
        workers=args.workers,
    )
    return _finish_mining(args, result, src_records, tgt_records)


def _cmd_refine(args) -> int:
    rows = mining.read_pairs(args.pairs, args.src_lang, args.tgt_lang)
    cfg = refine.FilterConfig(
        min_en_words=args.min_en_words,
        langid_enabled=not args.no_langid,
        dedup_enabled=not args.no_dedup,
        rng_seed=args.seed,
    )
    heldout = refine.load_heldout(args.heldout) if args.heldout else None
    kept, report = refine.refine_pipeline(rows, cfg, heldout=heldout)
    mining.write_pairs(args.out, kept)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            json.dump(report, f, sort_keys=True, indent=2)
            f.write("\n")
    _print_json(report)
    return 0


def _cmd_pivot(args) -> int:
    corpus_a = mining.read_pairs(args.corpus_a, "en", args.lang_a)
    corpus_b = mining.read_pairs(args.corpus_b, "en", args.lang_b)
    out = refine.pivot_extract(corpus_a, corpus_b, seed=args.seed)
    refine.write_pivot_pairs(args.out, out)
    _print_json({"pairs": len(out)})
    return 0


def _cmd_decontaminate(args) -> int:
    rows = mining.read_pairs(args.pairs, args.src_lang, args.tgt_lang)
    heldout = refine.load_heldout(args.heldout)
    kept, counts = refine.decontaminate(rows, heldout)
    mining.write_pairs(args.out, kept)
    _print_json({"input": len(rows), "kept": len(kept), "per_set": counts})
    return 0


def _cmd_sample_annotation(args) -> int:
    pool = mining.read_pairs(args.pairs, args.src_lang, args.tgt_lang)
    if args.near_misses:
        pool += mining.read_pairs(args.near_misses, args.src_lang, args.tgt_lang)
    samples, warnings = evaluation.stratified_sample(
        pool, args.threshold, args.n_per_band, seed=args.seed
    )
    evaluation.export_annotation_csv(samples, args.out_csv)
    evaluation.export_annotation_key(samples, args.out_key)
    batches = samples[-1].batch_id + 1 if samples else 0
    _print_json({"samples": len(samples), "batches": batches, "warnings": warnings})
    return 0


def _cmd_analyze(args) -> int:
    report = evaluation.analysis_report_from_files(args.key, args.annotations)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(report, f, sort_keys=True, indent=2)
            f.write("\n")
    _print_json(report)
    return 0


def _cmd_stats(args) -> int:
    rows = stats.read_counts(args.counts)
    result = stats.compute_stats(rows)
    if args.json:
        _print_json(result.to_dict())
    else:
        print(stats.format_table(result))
    return 0


def _cmd_run(args) -> int:
    overrides = [parse_override(raw) for raw in args.set or []]
    cfg = RunConfig.load(args.config, overrides=overrides, seed=args.seed)
    summary = run_pipeline(cfg)
    _print_json(
        {
            stage: (counts if counts is not None else "up-to-date")
            for stage, counts in summary.items()
        }
    )
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="bitextmine", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="segment documents into sentence records")
    p.add_argument("--docs", required=True, help="JSONL of source documents")
    p.add_argument("--lang", help="keep only documents with this language")
    p.add_argument(
        "--bucketing",
        choices=("month", "document_pair", "global"),
        default="global",
    )
    p.add_argument("--out", required=True, help="sentence TSV to write")
    p.add_argument("--report", help="write the JSON run report here too")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("embed-import", help="validate (and re-emit) a SEMB file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--sentences", help="reorder rows to match this sentence TSV")
    p.add_argument("--out", help="write the validated matrix here")
    p.set_defaults(func=_cmd_embed_import)

    p = sub.add_parser("embed-fetch", help="fetch embeddings from an HTTP provider")
    p.add_argument("--sentences", required=True)
    p.add_argument("--endpoint", required=True)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_embed_fetch)

    p = sub.add_parser("index-build", help="train and populate an IVF-PQ index")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--clusters", type=int, default=None, help="K (default sqrt(n))")
    p.add_argument("--m", type=int, default=64, help="PQ subspaces")
    p.add_argument("--residual", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--iters", type=int, default=20)
    p.add_argument("--train-rows", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_index_build)

    p = sub.add_parser("index-query", help="query an index (or brute force)")
    p.add_argument("--queries", required=True, help="SEMB file of query vectors")
    p.add_argument("--index")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--exact", action="store_true", help="brute force over --target")
    p.add_argument("--target", help="SEMB file to scan when --exact")
    p.set_defaults(func=_cmd_index_query)

    for mode in ("comparable", "docpair"):
        p = sub.add_parser(f"mine-{mode}", help=f"{mode} in-bucket mining")
        p.add_argument("--src-sentences", required=True)
        p.add_argument("--tgt-sentences", required=True)
        p.add_argument("--src-emb", required=True)
        p.add_argument("--tgt-emb", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--near-misses")
        p.add_argument("--threshold", type=float, default=None)
        p.add_argument("--report")
        p.set_defaults(func=lambda args, mode=mode: _cmd_mine_bucketed(args, mode))

    p = sub.add_parser("mine-mono", help="monolingual index mining")
    p.add_argument("--src-sentences", required=True)
    p.add_argument("--tgt-sentences", required=True)
    p.add_argument("--src-emb", required=True, help="embeddings of the indexed side")
    p.add_argument("--tgt-emb", required=True, help="embeddings of the query side")
    p.add_argument("--index", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--near-misses")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--report")
    p.set_defaults(func=_cmd_mine_mono)

    p = sub.add_parser("refine", help="length/langid/dedup filters")
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--src-lang", default="en")
    p.add_argument("--tgt-lang", required=True)
    p.add_argument("--min-en-words", type=int, default=4)
    p.add_argument("--no-langid", action="store_true")
    p.add_argument("--no-dedup", action="store_true")
    p.add_argument("--heldout", help="directory of held-out sets to subtract")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report")
    p.set_defaults(func=_cmd_refine)

    p = sub.add_parser("pivot", help="join two en-X corpora on English sentences")
    p.add_argument("--corpus-a", required=True)
    p.add_argument("--lang-a", required=True)
    p.add_argument("--corpus-b", required=True)
    p.add_argument("--lang-b", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_pivot)

    p = sub.add_parser("decontaminate", help="drop pairs overlapping held-out sets")
    p.add_argument("--pairs", required=True)
    p.add_argument("--heldout", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--src-lang", default="en")
    p.add_argument("--tgt-lang", required=True)
    p.set_defaults(func=_cmd_decontaminate)

    p = sub.add_parser("sample-annotation", help="stratified annotation sample")
    p.add_argument("--pairs", required=True)
    p.add_argument("--near-misses", help="sub-threshold pairs for the reject band")
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--n-per-band", type=int, required=True)
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-key", required=True)
    p.add_argument("--src-lang", default="en")
    p.add_argument("--tgt-lang", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_sample_annotation)

    p = sub.add_parser("analyze", help="statistics over collected annotations")
    p.add_argument("--key", required=True, help="annotation key CSV")
    p.add_argument("--annotations", required=True, help="collected annotation CSV")
    p.add_argument("--out", help="write the JSON report here too")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("stats", help="existing vs mined corpus summary")
    p.add_argument("--counts", required=True, help="TSV: pair, existing, mined")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("run", help="full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override a config field, e.g. --set index.m=16",
    )
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except StageFailure as exc:
        print(f"stage '{exc.stage}' failed: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except BitextmineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
