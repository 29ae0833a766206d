"""Knowledge base: API registry, seed commands, gazetteers, usage statistics.

The KB is treated as an immutable value. Every mutating operation returns a
new ``KnowledgeBase`` with ``version`` bumped by one; the input KB is never
touched, so snapshots can be handed across threads freely. All writes in a
running system go through a single owner (see ``runtime``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .errors import (
    CorruptFile,
    InvariantViolation,
    PhraseTooLong,
    UnknownApi,
    UnknownType,
    UnsupportedVersion,
)
from .textnorm import normalize, normalize_phrase

#: Context marker used as the "previous API" of the first command in a session.
START = "<start>"

#: KB file format version written by save_kb / accepted by load_kb.
FORMAT_VERSION = 1

#: Gazetteer phrases are at most this many tokens.
MAX_PHRASE_TOKENS = 4


@dataclass(frozen=True)
class Provenance:
    """Where a seed command or gazetteer value came from."""

    kind: str  # "authored" | "learned"
    session_id: str | None = None
    timestamp: str | None = None

    @classmethod
    def authored(cls) -> "Provenance":
        return cls(kind="authored")

    @classmethod
    def learned(cls, session_id: str, timestamp: str) -> "Provenance":
        return cls(kind="learned", session_id=session_id, timestamp=timestamp)

    @property
    def is_learned(self) -> bool:
        return self.kind == "learned"


@dataclass(frozen=True)
class ArgSpec:
    """One typed argument of an API action."""

    name: str
    type_name: str


@dataclass(frozen=True)
class ApiSpec:
    """An executable API action with its typed argument signature."""

    api_id: str
    args: tuple[ArgSpec, ...]
    description: str

    @property
    def arg_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.args)

    def arg(self, name: str) -> ArgSpec:
        for a in self.args:
            if a.name == name:
                return a
        raise KeyError(name)


@dataclass(frozen=True)
class SeedCommand:
    """A command template for one API.

    ``tokens`` is the normalized token sequence; tokens listed in
    ``covered_args`` are variable slots (they carry the argument name, e.g.
    ``X1``), everything else is a literal word.
    """

    sc_id: str
    api_id: str
    tokens: tuple[str, ...]
    covered_args: frozenset[str]
    provenance: Provenance

    @property
    def word_tokens(self) -> tuple[str, ...]:
        """Template tokens with the variable slots removed."""
        return tuple(t for t in self.tokens if t not in self.covered_args)

    def template_text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class TypeGazetteer:
    """Enumerated value lexicon for one slot type.

    Phrases are stored normalized (lowercase, single-spaced) and map to the
    provenance of the entry.
    """

    type_name: str
    values: dict[str, Provenance] = field(default_factory=dict)

    def __contains__(self, phrase: str) -> bool:
        return phrase in self.values

    def phrases(self) -> tuple[str, ...]:
        return tuple(self.values)


@dataclass
class KnowledgeBase:
    """The persistent world model: APIs, seed commands, gazetteers, usage.

    Instances are value-like: mutating operations return a new KB. The set
    of ``api_id`` keys is the set of known classes for novelty detection.
    """

    apis: dict[str, ApiSpec] = field(default_factory=dict)
    seed_commands: dict[str, tuple[SeedCommand, ...]] = field(default_factory=dict)
    gazetteers: dict[str, TypeGazetteer] = field(default_factory=dict)
    usage: dict[tuple[str, str], int] = field(default_factory=dict)
    version: int = 0

    # -- queries ------------------------------------------------------------

    def all_seed_commands(self):
        for api_id in self.apis:
            yield from self.seed_commands.get(api_id, ())

    def sc_count(self) -> int:
        return sum(len(scs) for scs in self.seed_commands.values())

    def learned_sc_count(self) -> int:
        return sum(1 for sc in self.all_seed_commands() if sc.provenance.is_learned)

    def find_sc(self, api_id: str, sc_id: str) -> SeedCommand:
        for sc in self.seed_commands.get(api_id, ()):
            if sc.sc_id == sc_id:
                return sc
        raise KeyError((api_id, sc_id))

    def context_total(self, context: str) -> int:
        return sum(n for (prev, _), n in self.usage.items() if prev == context)

    # -- validation ---------------------------------------------------------

    def validate(self) -> None:
        """Full referential-integrity pass; raises InvariantViolation."""
        for api in self.apis.values():
            names = [a.name for a in api.args]
            if len(set(names)) != len(names):
                raise InvariantViolation(f"{api.api_id}: duplicate argument names")
            if not api.description:
                raise InvariantViolation(f"{api.api_id}: empty description")
            for a in api.args:
                gaz = self.gazetteers.get(a.type_name)
                if gaz is None:
                    raise InvariantViolation(
                        f"{api.api_id}: argument {a.name} has undeclared type {a.type_name!r}"
                    )
                if not gaz.values:
                    raise InvariantViolation(
                        f"type {a.type_name!r} is referenced by {api.api_id} but has no values"
                    )
        for api_id, scs in self.seed_commands.items():
            if api_id not in self.apis:
                raise InvariantViolation(f"seed commands for unknown API {api_id!r}")
            seen_ids: set[str] = set()
            for sc in scs:
                _check_sc(self.apis[api_id], sc)
                if sc.sc_id in seen_ids:
                    raise InvariantViolation(f"duplicate sc_id {sc.sc_id!r}")
                seen_ids.add(sc.sc_id)
        for gaz in self.gazetteers.values():
            for phrase in gaz.values:
                if not phrase or phrase != normalize_phrase(phrase):
                    raise InvariantViolation(f"non-normalized gazetteer phrase {phrase!r}")
                if len(phrase.split()) > MAX_PHRASE_TOKENS:
                    raise InvariantViolation(f"gazetteer phrase too long: {phrase!r}")
        for prev, api_id in self.usage:
            if prev != START and prev not in self.apis:
                raise InvariantViolation(f"usage context {prev!r} unknown")
            if api_id not in self.apis:
                raise InvariantViolation(f"usage target {api_id!r} unknown")
        if self.version < 0:
            raise InvariantViolation("negative version")


def _check_sc(api: ApiSpec, sc: SeedCommand) -> None:
    if not sc.tokens:
        raise InvariantViolation(f"{sc.sc_id}: empty token list")
    if sc.api_id != api.api_id:
        raise InvariantViolation(f"{sc.sc_id}: api_id mismatch")
    arg_names = set(api.arg_names)
    if not sc.covered_args <= arg_names:
        extra = sorted(sc.covered_args - arg_names)
        raise InvariantViolation(f"{sc.sc_id}: unknown variables {extra}")
    derived = {t for t in sc.tokens if t in arg_names}
    if derived != sc.covered_args:
        raise InvariantViolation(f"{sc.sc_id}: covered_args does not match tokens")
    for name in sc.covered_args:
        if sc.tokens.count(name) != 1:
            raise InvariantViolation(f"{sc.sc_id}: variable {name} must appear exactly once")


# -- mutating operations (value semantics) ----------------------------------


def add_seed_command(kb: KnowledgeBase, sc: SeedCommand) -> KnowledgeBase:
    """Append a seed command to its API's list.

    Token-identical duplicates are not stored; the same KB (same version)
    comes back so repeated teaching cannot bloat the KB.
    """
    api = kb.apis.get(sc.api_id)
    if api is None:
        raise UnknownApi(sc.api_id)
    _check_sc(api, sc)
    existing = kb.seed_commands.get(sc.api_id, ())
    if any(prior.tokens == sc.tokens for prior in existing):
        return kb
    if any(prior.sc_id == sc.sc_id for prior in existing):
        raise InvariantViolation(f"sc_id {sc.sc_id!r} already used with different tokens")
    seed_commands = dict(kb.seed_commands)
    seed_commands[sc.api_id] = existing + (sc,)
    return replace(kb, seed_commands=seed_commands, version=kb.version + 1)


def add_gazetteer_value(
    kb: KnowledgeBase,
    type_name: str,
    phrase: str,
    provenance: Provenance | None = None,
) -> KnowledgeBase:
    """Store a (normalized) value phrase under a slot type.

    No-op if the phrase is already present. New values default to learned
    provenance since runtime growth is the point of this operation.
    """
    gaz = kb.gazetteers.get(type_name)
    if gaz is None:
        raise UnknownType(type_name)
    norm = normalize_phrase(phrase)
    if not norm:
        raise InvariantViolation("empty gazetteer phrase")
    if len(norm.split()) > MAX_PHRASE_TOKENS:
        raise PhraseTooLong(f"{phrase!r} exceeds {MAX_PHRASE_TOKENS} tokens")
    if norm in gaz.values:
        return kb
    values = dict(gaz.values)
    values[norm] = provenance or Provenance.learned(session_id="", timestamp="")
    gazetteers = dict(kb.gazetteers)
    gazetteers[type_name] = TypeGazetteer(type_name=type_name, values=values)
    return replace(kb, gazetteers=gazetteers, version=kb.version + 1)


def record_usage(kb: KnowledgeBase, prev_api: str | None, api_id: str) -> KnowledgeBase:
    """Increment the (previous API, API) bigram counter."""
    prev = START if prev_api is None else prev_api
    if prev != START and prev not in kb.apis:
        raise UnknownApi(prev)
    if api_id not in kb.apis:
        raise UnknownApi(api_id)
    usage = dict(kb.usage)
    usage[(prev, api_id)] = usage.get((prev, api_id), 0) + 1
    return replace(kb, usage=usage, version=kb.version + 1)


# -- persistence -------------------------------------------------------------


def _provenance_to_doc(p: Provenance) -> dict:
    doc: dict = {"kind": p.kind}
    if p.kind == "learned":
        doc["session_id"] = p.session_id or ""
        doc["timestamp"] = p.timestamp or ""
    return doc


def _provenance_from_doc(doc: dict) -> Provenance:
    kind = doc.get("kind")
    if kind == "authored":
        return Provenance.authored()
    if kind == "learned":
        return Provenance.learned(
            session_id=doc.get("session_id", ""), timestamp=doc.get("timestamp", "")
        )
    raise CorruptFile(f"bad provenance kind {kind!r}")


def save_kb(kb: KnowledgeBase) -> bytes:
    """Serialize to the versioned KB file format (UTF-8 JSON)."""
    doc = {
        "format_version": FORMAT_VERSION,
        "version": kb.version,
        "apis": [
            {
                "api_id": api.api_id,
                "args": [{"name": a.name, "type": a.type_name} for a in api.args],
                "description": api.description,
            }
            for api in kb.apis.values()
        ],
        "seed_commands": {
            api_id: [
                {
                    "sc_id": sc.sc_id,
                    "tokens": list(sc.tokens),
                    "covered_args": sorted(sc.covered_args),
                    "provenance": _provenance_to_doc(sc.provenance),
                }
                for sc in scs
            ]
            for api_id, scs in kb.seed_commands.items()
        },
        "gazetteers": {
            t: {
                "values": [
                    {"phrase": phrase, "provenance": _provenance_to_doc(prov)}
                    for phrase, prov in sorted(gaz.values.items())
                ]
            }
            for t, gaz in kb.gazetteers.items()
        },
        "usage": [
            {"prev": prev, "api": api_id, "count": n}
            for (prev, api_id), n in sorted(kb.usage.items())
        ],
    }
    return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")


def load_kb(data: bytes) -> KnowledgeBase:
    """Parse and validate a KB file; inverse of save_kb."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptFile(f"not a KB file: {exc}") from exc
    if not isinstance(doc, dict):
        raise CorruptFile("top level is not an object")
    fv = doc.get("format_version")
    if fv != FORMAT_VERSION:
        raise UnsupportedVersion(f"format_version {fv!r} (supported: {FORMAT_VERSION})")
    try:
        apis: dict[str, ApiSpec] = {}
        for entry in doc["apis"]:
            api = ApiSpec(
                api_id=entry["api_id"],
                args=tuple(ArgSpec(name=a["name"], type_name=a["type"]) for a in entry["args"]),
                description=entry["description"],
            )
            if api.api_id in apis:
                raise CorruptFile(f"duplicate api {api.api_id!r}")
            apis[api.api_id] = api
        seed_commands: dict[str, tuple[SeedCommand, ...]] = {}
        for api_id, entries in doc["seed_commands"].items():
            seed_commands[api_id] = tuple(
                SeedCommand(
                    sc_id=e["sc_id"],
                    api_id=api_id,
                    tokens=tuple(e["tokens"]),
                    covered_args=frozenset(e["covered_args"]),
                    provenance=_provenance_from_doc(e["provenance"]),
                )
                for e in entries
            )
        gazetteers = {
            t: TypeGazetteer(
                type_name=t,
                values={
                    v["phrase"]: _provenance_from_doc(v["provenance"]) for v in g["values"]
                },
            )
            for t, g in doc["gazetteers"].items()
        }
        usage = {(u["prev"], u["api"]): int(u["count"]) for u in doc["usage"]}
        version = int(doc["version"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile(f"malformed KB document: {exc!r}") from exc
    kb = KnowledgeBase(
        apis=apis,
        seed_commands=seed_commands,
        gazetteers=gazetteers,
        usage=usage,
        version=version,
    )
    try:
        kb.validate()
    except InvariantViolation as exc:
        raise CorruptFile(str(exc)) from exc
    return kb


def sc_tokens_from_template(api: ApiSpec, template: str) -> tuple[tuple[str, ...], frozenset[str]]:
    """Normalize a template string into SC tokens.

    Tokens matching an argument name (case-insensitively) become variable
    slots carrying the canonical argument name.
    """
    by_upper = {a.name.upper(): a.name for a in api.args}
    tokens = []
    covered = set()
    for tok in normalize(template):
        canon = by_upper.get(tok.upper())
        if canon is not None:
            tokens.append(canon)
            covered.add(canon)
        else:
            tokens.append(tok)
    return tuple(tokens), frozenset(covered)
