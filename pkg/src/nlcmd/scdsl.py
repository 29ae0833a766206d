"""Line-oriented seed-command DSL parser.

The application developer declares slot types, API actions and their seed
commands in a plain text file (conventionally ``*.scs``)::

    # smart lights
    type location = { bedroom, kitchen }
    type color = { blue, red }

    api SwitchOnLight(X1: location) "switch on the light in the X1"
      sc "Switch on the light in X1"
      sc "Put on light in X1"

Rules: one declaration per line; ``sc`` lines are indented and attach to the
most recent ``api``; ``#`` starts a comment (outside quotes); blank lines are
ignored. Types may be declared after the APIs that use them — referential
checks run once the whole file is read, so parsing never yields a partial KB.
"""

from __future__ import annotations

import re

from .errors import DuplicateApi, ScSyntaxError, UnboundVariable, UnknownType
from .kb import (
    ApiSpec,
    ArgSpec,
    KnowledgeBase,
    MAX_PHRASE_TOKENS,
    Provenance,
    SeedCommand,
    TypeGazetteer,
    sc_tokens_from_template,
)
from .textnorm import normalize_phrase

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_TYPE_RE = re.compile(rf"^type\s+({_IDENT})\s*=\s*\{{(.*)\}}\s*$")
_API_RE = re.compile(rf'^api\s+({_IDENT})\s*\((.*?)\)\s*"(.*)"\s*$')
_SC_RE = re.compile(r'^sc\s+"(.*)"\s*$')
_ARG_RE = re.compile(rf"^({_IDENT})\s*:\s*({_IDENT})$")

#: Tokens of this shape are always treated as variable references.
_VAR_SHAPE = re.compile(r"^[Xx][0-9]+$")


def _strip_comment(line: str) -> str:
    in_quote = False
    for i, ch in enumerate(line):
        if ch == '"':
            in_quote = not in_quote
        elif ch == "#" and not in_quote:
            return line[:i]
    return line


def parse_spec(text: str) -> KnowledgeBase:
    """Parse DSL source into a fresh validated KnowledgeBase (version 0)."""
    gazetteers: dict[str, TypeGazetteer] = {}
    type_lines: dict[str, int] = {}
    apis: dict[str, ApiSpec] = {}
    api_lines: dict[str, int] = {}
    seed_commands: dict[str, list[SeedCommand]] = {}
    current_api: str | None = None

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw_line)
        stripped = line.strip()
        if not stripped:
            continue
        indented = line[: len(line) - len(line.lstrip())] != ""
        col = line.index(stripped[0]) + 1

        if stripped.startswith("type "):
            m = _TYPE_RE.match(stripped)
            if m is None:
                raise ScSyntaxError(lineno, col, "malformed type declaration")
            name, body = m.group(1), m.group(2)
            if name in type_lines:
                raise ScSyntaxError(lineno, col, f"duplicate type {name!r}")
            values: dict[str, Provenance] = {}
            for segment in body.split(","):
                phrase = normalize_phrase(segment)
                if not phrase:
                    if segment.strip() or len(body.split(",")) > 1:
                        raise ScSyntaxError(lineno, col, f"empty value in type {name!r}")
                    continue  # "{}" — declared empty, checked on reference
                if len(phrase.split()) > MAX_PHRASE_TOKENS:
                    raise ScSyntaxError(
                        lineno, col, f"value {phrase!r} exceeds {MAX_PHRASE_TOKENS} tokens"
                    )
                values[phrase] = Provenance.authored()
            gazetteers[name] = TypeGazetteer(type_name=name, values=values)
            type_lines[name] = lineno
            current_api = None

        elif stripped.startswith("api "):
            m = _API_RE.match(stripped)
            if m is None:
                raise ScSyntaxError(lineno, col, "malformed api declaration")
            api_id, args_src, description = m.group(1), m.group(2), m.group(3)
            if api_id in apis:
                raise DuplicateApi(f"line {lineno}: api {api_id!r} already declared")
            if not description.strip():
                raise ScSyntaxError(lineno, col, f"api {api_id!r} needs a description")
            args: list[ArgSpec] = []
            if args_src.strip():
                for part in args_src.split(","):
                    am = _ARG_RE.match(part.strip())
                    if am is None:
                        raise ScSyntaxError(lineno, col, f"malformed argument {part.strip()!r}")
                    arg_name, type_name = am.group(1), am.group(2)
                    if any(a.name == arg_name for a in args):
                        raise ScSyntaxError(lineno, col, f"duplicate argument {arg_name!r}")
                    args.append(ArgSpec(name=arg_name, type_name=type_name))
            apis[api_id] = ApiSpec(api_id=api_id, args=tuple(args), description=description)
            api_lines[api_id] = lineno
            seed_commands[api_id] = []
            current_api = api_id

        elif stripped.startswith("sc ") or stripped == "sc":
            m = _SC_RE.match(stripped)
            if m is None:
                raise ScSyntaxError(lineno, col, "malformed sc declaration")
            if current_api is None:
                raise ScSyntaxError(lineno, col, "sc outside of an api block")
            if not indented:
                raise ScSyntaxError(lineno, 1, "sc lines must be indented under their api")
            api = apis[current_api]
            tokens, covered = sc_tokens_from_template(api, m.group(1))
            if not tokens:
                raise ScSyntaxError(lineno, col, "empty seed command")
            for tok in tokens:
                if tok in covered:
                    continue
                if _VAR_SHAPE.match(tok):
                    raise UnboundVariable(
                        f"line {lineno}: variable {tok.upper()!r} is not an argument "
                        f"of {current_api}"
                    )
            for name in covered:
                if tokens.count(name) > 1:
                    raise ScSyntaxError(lineno, col, f"variable {name} used more than once")
            if any(sc.tokens == tokens for sc in seed_commands[current_api]):
                continue  # authored duplicate, keep the first
            sc = SeedCommand(
                sc_id=f"{current_api}#{len(seed_commands[current_api]) + 1:03d}",
                api_id=current_api,
                tokens=tokens,
                covered_args=covered,
                provenance=Provenance.authored(),
            )
            seed_commands[current_api].append(sc)

        else:
            raise ScSyntaxError(lineno, col, f"unrecognized directive {stripped.split()[0]!r}")

    # Whole-file referential checks (declaration order does not matter).
    for api in apis.values():
        for a in api.args:
            if a.type_name not in gazetteers:
                raise UnknownType(
                    f"line {api_lines[api.api_id]}: api {api.api_id!r} uses "
                    f"undeclared type {a.type_name!r}"
                )
            if not gazetteers[a.type_name].values:
                raise ScSyntaxError(
                    api_lines[api.api_id],
                    1,
                    f"type {a.type_name!r} is empty but used by {api.api_id!r}",
                )

    kb = KnowledgeBase(
        apis=apis,
        seed_commands={k: tuple(v) for k, v in seed_commands.items()},
        gazetteers=gazetteers,
        usage={},
        version=0,
    )
    kb.validate()
    return kb
