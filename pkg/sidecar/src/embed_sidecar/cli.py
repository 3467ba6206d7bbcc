"""Command-line interface: embed docs | embed terms."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from embed_sidecar.encoder import DEFAULT_MODEL, encode_documents, encode_terms

log = logging.getLogger("embed_sidecar")


def cmd_docs(args) -> int:
    manifest = encode_documents(args.corpus, args.out, args.model,
                                args.batch_size)
    print(json.dumps(manifest))
    return 0


def cmd_terms(args) -> int:
    manifest = encode_terms(args.terms, args.out, args.model, args.batch_size)
    print(json.dumps(manifest))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed",
        description="Encode documents or terms into embedding matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("docs", help="encode a JSONL corpus")
    p.add_argument("--corpus", required=True, help="corpus JSONL file")
    p.add_argument("--model", default=DEFAULT_MODEL)
    p.add_argument("--out", required=True, help="output matrix path")
    p.add_argument("--batch-size", type=int, default=32)
    p.set_defaults(func=cmd_docs)

    p = sub.add_parser("terms", help="encode one term per line")
    p.add_argument("--terms", required=True, help="term list file")
    p.add_argument("--model", default=DEFAULT_MODEL)
    p.add_argument("--out", required=True, help="output matrix path")
    p.add_argument("--batch-size", type=int, default=32)
    p.set_defaults(func=cmd_terms)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        log.error("%s", exc)
        return 2
    except ValueError as exc:
        log.error("%s", exc)
        return 1
    except Exception as exc:
        log.exception("internal error: %s", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
