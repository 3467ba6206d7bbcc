"""Command-line interface: ingest | build | relate | export | query | stats.

Exit codes: 0 ok, 1 validation error, 2 missing input, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from stont import export as export_mod
from stont import ontology as ontology_mod
from stont import store as store_mod
from stont.config import PipelineConfig, apply_preset
from stont.corpus import harvest, load_corpus, parse_date, save_corpus
from stont.embedding_io import read_matrix
from stont.errors import ConfigError, CorpusError, StontError
from stont.pipeline import run_pipeline

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_MISSING_INPUT = 2
EXIT_INTERNAL = 3

log = logging.getLogger("stont")


def _load_config(args) -> PipelineConfig:
    config = (PipelineConfig.from_file(args.config) if args.config
              else PipelineConfig())
    if getattr(args, "preset", None):
        apply_preset(config, args.preset)
    if getattr(args, "seed", None) is not None:
        config.umap.seed = args.seed
    return config


def _require(path, what: str):
    if not path or not os.path.exists(path):
        raise FileNotFoundError(f"{what} not found: {path}")
    return path


def cmd_ingest(args) -> int:
    window = None
    if args.date_from or args.date_to:
        if not (args.date_from and args.date_to):
            raise ConfigError("--from and --to must be given together")
        window = (parse_date(args.date_from), parse_date(args.date_to))
    if args.endpoint:
        corpus = harvest(
            args.endpoint,
            fields_of_study=args.fields_of_study,
            date_range=args.date_range,
            page_size=args.page_size,
            corpus_path=args.out,
            max_records=args.max_records,
        )
    else:
        _require(args.input, "corpus file")
        corpus = load_corpus(args.input, window=window)
        save_corpus(corpus, args.out)
    print(json.dumps(corpus.report))
    return EXIT_OK


def cmd_build(args) -> int:
    config = _load_config(args)
    _require(args.corpus, "corpus file")
    _require(args.embeddings, "embeddings file")
    result = run_pipeline(
        args.corpus, args.embeddings, config, args.out,
        net_id=args.net_id, created_on=args.created_on,
        reduced_path=args.reduced,
    )
    print(export_mod.stats_text(result["stats"]))
    return EXIT_OK


def cmd_relate(args) -> int:
    config = _load_config(args)
    net, memberships = store_mod.load(_require(args.snapshot, "snapshot"))
    base = [t for t in net.topics if t.topic_id not in
            {p for p, _ in net.hierarchy}]
    net.topics = base
    net.similarities = ontology_mod.related_identical(
        base, config.ontology.similarity_threshold)
    net.edges = ontology_mod.common_article_edges(memberships, base)
    meta, hierarchy = ontology_mod.super_topics(
        base, config.ontology.hierarchy_floor)
    net.topics = base + meta
    net.hierarchy = hierarchy
    store_mod.persist(net, memberships, args.out or args.snapshot)
    print(export_mod.stats_text(export_mod.stats(net)))
    return EXIT_OK


def cmd_export(args) -> int:
    net, _ = store_mod.load(_require(args.snapshot, "snapshot"))
    if args.format == "skos":
        out = args.out or os.path.join(args.snapshot, "ontology.ttl")
        export_mod.export_skos(net, args.base_iri, out)
        print(f"wrote {out}")
    else:
        out = args.out or os.path.join(args.snapshot, "graph")
        export_mod.export_graph(net, out)
        print(f"wrote {out}/nodes.csv, edges.csv, statements.cypher")
    return EXIT_OK


def cmd_query(args) -> int:
    net, _ = store_mod.load(_require(args.snapshot, "snapshot"))
    term_matrix = read_matrix(_require(args.terms, "term matrix"))
    rows = ontology_mod.n_similar_topics(args.keyword, args.top,
                                         net.topics, term_matrix)
    print(f"{'topic_id':>10}  {'similarity':>10}  label")
    for topic_id, label, sim in rows:
        print(f"{topic_id:>10}  {sim:>10.4f}  {label}")
    return EXIT_OK


def cmd_stats(args) -> int:
    net, _ = store_mod.load(_require(args.snapshot, "snapshot"))
    report = export_mod.stats(net)
    if args.json:
        with open(args.json, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(export_mod.stats_text(report))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stont",
        description="Build and query science-and-technology topic ontologies.",
    )
    parser.add_argument("--threads", type=int, default=0,
                        help="worker threads (output is identical for any value)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load/normalize a JSONL corpus or "
                                      "harvest a REST endpoint")
    p.add_argument("--input", help="input JSONL file")
    p.add_argument("--out", required=True, help="output corpus JSONL")
    p.add_argument("--from", dest="date_from", help="window start (YYYY-MM)")
    p.add_argument("--to", dest="date_to", help="window end (YYYY-MM)")
    p.add_argument("--endpoint", help="harvest from this REST endpoint")
    p.add_argument("--fields-of-study", default="")
    p.add_argument("--date-range", default="")
    p.add_argument("--page-size", type=int, default=100)
    p.add_argument("--max-records", type=int, default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build", help="run the full pipeline to a snapshot")
    p.add_argument("--corpus", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--config", help="INI config file")
    p.add_argument("--preset", help="named parameter preset")
    p.add_argument("--seed", type=int, help="override reducer seed")
    p.add_argument("--out", required=True)
    p.add_argument("--net-id", type=int, default=1)
    p.add_argument("--created-on", help="fixed RFC3339 timestamp for "
                                        "reproducible snapshots")
    p.add_argument("--reduced", help="path for resumable reduced matrix")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("relate", help="recompute relations on a snapshot")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_relate)

    p = sub.add_parser("export", help="emit SKOS Turtle or graph import files")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--format", choices=("skos", "graph"), required=True)
    p.add_argument("--base-iri", default="https://example.org/stont")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("query", help="topic queries")
    qsub = p.add_subparsers(dest="query_command", required=True)
    q = qsub.add_parser("similar", help="top-x topics for a keyword")
    q.add_argument("--keyword", required=True)
    q.add_argument("--top", type=int, default=5)
    q.add_argument("--snapshot", required=True)
    q.add_argument("--terms", required=True, help="term embedding matrix")
    q.set_defaults(func=cmd_query)

    p = sub.add_parser("stats", help="structural report for a snapshot")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--json", help="also write the report as JSON here")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        log.error("%s", exc)
        return EXIT_MISSING_INPUT
    except (ConfigError, CorpusError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    except StontError as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    except Exception as exc:  # pragma: no cover
        log.exception("internal error: %s", exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
