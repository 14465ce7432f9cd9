"""Operator command line: ingest, query, serve, repl.

Exit codes: 0 success, 1 validation or data error, 2 I/O error, 3 network
error. The repl reads one query per line; meta commands start with ":" so
they cannot collide with natural-language input:

    :q                quit
    :suggest [text]   ask for follow-up question suggestions
    :converse <text>  open-ended conversation grounded in the dataset

With --format json every turn prints a single JSON line carrying the
reply, the retrieval hits, and the exact prompt that was sent (guideline,
context block, message list), which makes transcripts machine-checkable.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .backends import EchoBackend, RemoteChatBackend, ScriptedBackend
from .corpus import load_corpus
from .embedding import LocalHashEmbedder, RemoteEmbedder, get_provider
from .engine import PromptMode, RagEngine, build_index
from .errors import (
    AuthError,
    BackendError,
    BadDimensionError,
    BudgetTooSmallError,
    CorruptIndexError,
    DeadlineExceeded,
    DecodeError,
    DimMismatchError,
    DuplicateKeyError,
    EmptyTextError,
    FormatVersionError,
    HeritageBotError,
    IoError,
    MalformedResponseError,
    RateLimitError,
    SchemaError,
    StaleIndexError,
    TransportError,
)
from .index import VectorIndex
from .service import ChatService, create_app

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DATA = 1
EXIT_IO = 2
EXIT_NETWORK = 3


def provider_for_index(index: VectorIndex):
    """Rebuild the provider an index was created with."""
    if index.provider_id == LocalHashEmbedder.provider_id:
        return LocalHashEmbedder(dim=index.dim)
    if index.provider_id.startswith("remote:"):
        provider = RemoteEmbedder.from_env(dim=index.dim)
        if provider.provider_id != index.provider_id:
            raise ValueError(
                f"index was built with {index.provider_id!r} but the environment "
                f"configures {provider.provider_id!r}"
            )
        return provider
    raise ValueError(f"index built by unknown provider {index.provider_id!r}")


def make_backend(args):
    if args.backend == "echo":
        return EchoBackend()
    if args.backend == "scripted":
        if not args.script:
            raise ValueError("--backend scripted requires --script FILE")
        return ScriptedBackend.from_file(args.script)
    return RemoteChatBackend.from_env()


def load_engine(args) -> RagEngine:
    corpus = load_corpus(args.data)
    index = VectorIndex.load(args.index)
    provider = provider_for_index(index)
    return RagEngine(corpus, index, provider, make_backend(args))


def cmd_ingest(args) -> int:
    corpus = load_corpus(args.data)
    provider = get_provider(args.provider, args.dim)
    index = build_index(corpus, provider)
    index.save(args.index)
    if args.format == "json":
        print(json.dumps({
            "records": len(index),
            "dim": index.dim,
            "provider_id": index.provider_id,
            "index_path": args.index,
        }, sort_keys=True))
    else:
        print(f"indexed {len(index)} records (dim={index.dim}, "
              f"provider={index.provider_id}) -> {args.index}")
    return EXIT_OK


def cmd_query(args) -> int:
    corpus = load_corpus(args.data)
    index = VectorIndex.load(args.index)
    provider = provider_for_index(index)
    from .engine import retrieve_context

    ctx = retrieve_context(args.query, corpus, index, provider, k=args.k, min_score=-1.0)
    if args.format == "json":
        hits = [
            {
                "main_key": record.main_key,
                "score": score,
                "record": {
                    "main_key": record.main_key,
                    "name_eng": record.name_eng,
                    "h_eng_dong": record.h_eng_dong,
                    "h_eng_gu": record.h_eng_gu,
                    "h_eng_city": record.h_eng_city,
                },
            }
            for record, score in ctx.hits
        ]
        print(json.dumps({"hits": hits}, sort_keys=True, ensure_ascii=False))
    else:
        from .corpus import render_document_text

        for record, score in ctx.hits:
            print(f"{record.main_key}\t{score:.6f}\t{render_document_text(record)}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    logging.basicConfig(level=logging.INFO)
    engine = load_engine(args)
    service = ChatService(engine, journal_path=args.session_journal)
    app = create_app(service, allow_origin=args.allow_origin)
    host, _, port = args.listen.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return EXIT_OK


def _parse_repl_line(line: str) -> tuple[PromptMode, str] | None:
    """Map an input line to (mode, user_text); None for unknown commands."""
    if line.startswith(":"):
        command, _, rest = line.partition(" ")
        if command == ":suggest":
            return PromptMode.SUGGEST_FOLLOWUPS, rest.strip()
        if command == ":converse":
            return PromptMode.DATASET_CONVERSATION, rest.strip()
        return None
    return PromptMode.ANSWER, line


def _print_repl_error(exc: Exception, fmt: str) -> None:
    code = exc.code if isinstance(exc, HeritageBotError) else "error"
    if fmt == "json":
        print(json.dumps({"error": {"code": code, "message": str(exc)}},
                         sort_keys=True, ensure_ascii=False))
    else:
        print(f"error ({code}): {exc}")


def cmd_repl(args) -> int:
    engine = load_engine(args)
    interactive = sys.stdin.isatty() and args.format == "text"
    history: list[tuple[str, str]] = []
    while True:
        try:
            line = input("you> " if interactive else "").strip()
        except EOFError:
            return EXIT_OK
        if not line:
            continue
        if line == ":q":
            return EXIT_OK
        parsed = _parse_repl_line(line)
        if parsed is None:
            _print_repl_error(ValueError(f"unknown command {line.split()[0]!r}"), args.format)
            continue
        mode, user_text = parsed
        try:
            result = engine.respond(history, user_text, mode=mode)
        except BackendError as exc:
            _print_repl_error(exc, args.format)
            continue
        except HeritageBotError as exc:
            _print_repl_error(exc, args.format)
            continue

        if user_text:
            history.append(("user", user_text))
            history.append(("assistant", result.reply))

        if args.format == "json":
            payload = {
                "mode": mode.value,
                "reply": result.reply,
                "hits": [
                    {"main_key": record.main_key, "score": score}
                    for record, score in result.context.hits
                ],
                "prompt": {
                    "guideline": result.bundle.guideline,
                    "context_block": result.bundle.context_block,
                    "messages": [
                        {"role": m.role, "content": m.content}
                        for m in result.bundle.to_messages()
                    ],
                },
            }
            if mode is PromptMode.SUGGEST_FOLLOWUPS:
                from .service import parse_suggestions

                payload["suggestions"] = parse_suggestions(result.reply)
            print(json.dumps(payload, sort_keys=True, ensure_ascii=False))
        else:
            print(f"bot> {result.reply}")
            if result.context.hits:
                sources = ", ".join(
                    f"{record.main_key} ({score:.4f})" for record, score in result.context.hits
                )
                print(f"     sources: {sources}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heritagebot",
        description="Retrieval-augmented chat over a Seoul heritage dataset.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "json"], default="text",
                        help="output format (default: text)")

    p_ingest = sub.add_parser("ingest", parents=[common],
                              help="parse a dataset file and build the vector index")
    p_ingest.add_argument("--data", required=True, help="dataset file (.jsonl or .csv)")
    p_ingest.add_argument("--index", required=True, help="index file to write")
    p_ingest.add_argument("--provider", choices=["local", "remote"], default="local")
    p_ingest.add_argument("--dim", type=int, default=256, help="embedding dimension (default: 256)")
    p_ingest.set_defaults(func=cmd_ingest)

    p_query = sub.add_parser("query", parents=[common], help="retrieval only, no generation")
    p_query.add_argument("query", help="query text")
    p_query.add_argument("--data", required=True)
    p_query.add_argument("--index", required=True)
    p_query.add_argument("--k", type=int, default=5)
    p_query.set_defaults(func=cmd_query)

    p_serve = sub.add_parser("serve", parents=[common], help="run the HTTP chat service")
    p_serve.add_argument("--data", required=True)
    p_serve.add_argument("--index", required=True)
    p_serve.add_argument("--backend", choices=["remote", "scripted", "echo"], default="remote")
    p_serve.add_argument("--script", help="replies file for --backend scripted (one JSON string per line)")
    p_serve.add_argument("--listen", default="127.0.0.1:8080", help="host:port (default: 127.0.0.1:8080)")
    p_serve.add_argument("--session-journal", help="json-lines journal replayed at boot")
    p_serve.add_argument("--allow-origin", help="CORS origin for the web client")
    p_serve.set_defaults(func=cmd_serve)

    p_repl = sub.add_parser("repl", parents=[common], help="terminal chat loop")
    p_repl.add_argument("--data", required=True)
    p_repl.add_argument("--index", required=True)
    p_repl.add_argument("--backend", choices=["remote", "scripted", "echo"], default="remote")
    p_repl.add_argument("--script", help="replies file for --backend scripted (one JSON string per line)")
    p_repl.set_defaults(func=cmd_repl)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (TransportError, AuthError, RateLimitError, DeadlineExceeded,
            MalformedResponseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NETWORK
    except (DecodeError, SchemaError, DuplicateKeyError, EmptyTextError,
            BadDimensionError, DimMismatchError, CorruptIndexError,
            FormatVersionError, StaleIndexError, BudgetTooSmallError,
            HeritageBotError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
