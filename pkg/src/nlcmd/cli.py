"""Command-line entry points: repl, serve, eval, compile.

Exit codes: 0 ok, 1 runtime failure, 2 usage problem (bad flags, unreadable
input files).
"""

from __future__ import annotations

import argparse
import logging
import sys
import threading
from pathlib import Path

from .config import EngineConfig, load_config
from .dialogue import ActionKind
from .errors import EngineError, InvalidOptionIndex
from .harness import load_corpus, run_corpus
from .kb import KnowledgeBase, load_kb, save_kb
from .runtime import EngineRuntime
from .scdsl import parse_spec

logger = logging.getLogger(__name__)

USAGE_EXIT = 2
RUNTIME_EXIT = 1


def _load_kb_file(path: str) -> KnowledgeBase:
    try:
        return load_kb(Path(path).read_bytes())
    except OSError as exc:
        raise SystemExit(_usage_error(f"cannot read KB file {path}: {exc.strerror or exc}"))
    except EngineError as exc:
        raise SystemExit(_usage_error(f"bad KB file {path}: {exc}"))


def _usage_error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return USAGE_EXIT


def _load_config_arg(path: str | None) -> EngineConfig:
    if path is None:
        return EngineConfig()
    try:
        return load_config(path)
    except EngineError as exc:
        raise SystemExit(_usage_error(str(exc)))


def _print_agent(action, learned: bool) -> None:
    print(f"bot: {action.text}")
    if action.kind is ActionKind.OFFER_OPTIONS:
        for opt in action.options:
            print(f"bot:   option-{opt.index}. {opt.label}")
        print("bot:   (reply with a number, or 'none')")
    if learned:
        print(f"bot: Learned a new command pattern for {action.api_id}.")


def cmd_repl(args) -> int:
    kb = _load_kb_file(args.kb)
    config = _load_config_arg(args.config)
    runtime = EngineRuntime(kb, config, kb_path=args.save_kb or args.kb)
    session_id = runtime.create_session()
    interactive = sys.stdin.isatty()
    if interactive:
        print("bot: Ready. Type a command (:kb, :save, :quit).")
    while True:
        if interactive:
            print("you> ", end="", flush=True)
        line = sys.stdin.readline()
        if not line:
            break
        text = line.strip()
        if not text:
            continue
        if text == ":quit":
            break
        if text == ":kb":
            summary = runtime.kb_summary()
            print(
                f"bot: KB v{summary['kb_version']}: {summary['api_count']} APIs, "
                f"{summary['sc_count']} seed commands "
                f"({summary['learned_sc_count']} learned)."
            )
            continue
        if text == ":save":
            target = runtime.save()
            print(f"bot: Saved KB to {target}.")
            continue
        try:
            outcome = runtime.submit_text(session_id, text)
        except InvalidOptionIndex as exc:
            print(f"bot: {exc} Try again.")
            continue
        _print_agent(outcome.action, outcome.learned)
    if args.save_kb and runtime.dirty:
        runtime.save(args.save_kb)
    print("bot: Bye.")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    kb = _load_kb_file(args.kb)
    config = _load_config_arg(args.config)
    runtime = EngineRuntime(kb, config, kb_path=args.save_kb or args.kb)
    frontend = Path(args.frontend) if args.frontend else None
    app = create_app(runtime, frontend_dir=frontend)

    if config.autosave_interval:

        def autosave():
            import time

            while True:
                time.sleep(config.autosave_interval)
                if runtime.dirty:
                    try:
                        runtime.save()
                    except EngineError:
                        logger.exception("autosave failed")

        threading.Thread(target=autosave, daemon=True).start()

    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    finally:
        if runtime.dirty and runtime.kb_path:
            runtime.save()
    return 0


def cmd_eval(args) -> int:
    kb = _load_kb_file(args.kb)
    config = _load_config_arg(args.config)
    try:
        corpus = load_corpus(args.corpus)
    except OSError as exc:
        return _usage_error(f"cannot read corpus {args.corpus}: {exc.strerror or exc}")
    except EngineError as exc:
        return _usage_error(str(exc))
    try:
        report = run_corpus(kb, corpus, config, passes=args.passes)
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_EXIT

    def fmt(x):
        return "n/a" if x is None else f"{x:.3f}"

    print(f"items             {report.n}")
    print(f"exec accuracy     {fmt(report.exec_accuracy)}")
    print(f"top-k hit rate    {fmt(report.topk_hit_rate)}")
    print(f"mean questions    {fmt(report.mean_questions)}")
    print(f"learned SCs       {report.learned_sc_count}")
    print(f"pass1 accuracy    {fmt(report.pass1_accuracy)}")
    print(f"pass2 accuracy    {fmt(report.pass2_accuracy)}")
    print(f"pass1 questions   {fmt(report.pass1_mean_questions)}")
    print(f"pass2 questions   {fmt(report.pass2_mean_questions)}")
    if args.report_out:
        Path(args.report_out).write_bytes(report.to_json_bytes())
        print(f"report written to {args.report_out}")
    if args.save_kb and report.final_kb is not None:
        Path(args.save_kb).write_bytes(save_kb(report.final_kb))
        print(f"learned KB written to {args.save_kb}")
    return 0


def cmd_compile(args) -> int:
    try:
        text = Path(args.seed_spec).read_text("utf-8")
    except OSError as exc:
        return _usage_error(f"cannot read {args.seed_spec}: {exc.strerror or exc}")
    try:
        kb = parse_spec(text)
    except EngineError as exc:
        print(f"error: {args.seed_spec}: {exc}", file=sys.stderr)
        return USAGE_EXIT
    out = Path(args.out)
    out.write_bytes(save_kb(kb))
    print(f"compiled {len(kb.apis)} APIs, {kb.sc_count()} seed commands -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlcmd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("repl", help="interactive terminal dialogue")
    p.add_argument("--kb", required=True, help="KB file to load")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--save-kb", help="write the learned KB here on exit")
    p.set_defaults(func=cmd_repl)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--kb", required=True)
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--port", type=int, default=8414)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--save-kb", help="write the learned KB here on shutdown")
    p.add_argument("--frontend", help="static UI directory to serve at /")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("eval", help="run a corpus through the harness")
    p.add_argument("--kb", required=True)
    p.add_argument("--corpus", required=True, help="line-delimited JSON corpus")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--passes", type=int, default=2)
    p.add_argument("--report-out", help="write the JSON report here")
    p.add_argument("--save-kb", help="write the learned KB here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compile", help="compile a .scs seed spec into a KB file")
    p.add_argument("--seed-spec", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compile)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except KeyboardInterrupt:
        return 0
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_EXIT


if __name__ == "__main__":
    sys.exit(main())
