"""Interactive continual learning: resolved dialogues become new knowledge.

A finished clarification dialogue yields a LearnEpisode — the utterance,
the ground-truth API, and where each argument value came from. Committing
an episode induces a new seed command (argument spans found in the
utterance are replaced by their variables), adds any elicited values to
their gazetteers, and records the usage bigram. The KB only ever grows, so
nothing previously learned can degrade.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from datetime import datetime, timezone

from .errors import DegenerateTemplate, InvariantViolation, UnknownApi, UnknownType
from .grounding import GroundingIndex
from .kb import (
    KnowledgeBase,
    Provenance,
    SeedCommand,
    add_gazetteer_value,
    add_seed_command,
    record_usage,
)
from .textnorm import normalize

FROM_UTTERANCE = "from_utterance"
ELICITED = "elicited"


@dataclass(frozen=True)
class ResolvedArg:
    """One argument's ground-truth value and how it was obtained."""

    value: str
    source: str  # FROM_UTTERANCE | ELICITED
    span: tuple[int, int] | None = None  # token span, only for FROM_UTTERANCE


@dataclass(frozen=True)
class LearnEpisode:
    """Ground truth harvested from one resolved dialogue."""

    session_id: str
    original_utterance: str
    resolved_api: str
    resolved_args: dict[str, ResolvedArg]
    kb_version: int
    context_api: str | None = None


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def induce_seed_command(episode: LearnEpisode, timestamp: str | None = None) -> SeedCommand:
    """Build the seed command a resolved episode teaches.

    Only argument values that literally appeared in the utterance become
    variables; elicited-only arguments are left out of the template and
    will simply be asked again when the template is used.
    """
    tokens = normalize(episode.original_utterance)
    spans: list[tuple[tuple[int, int], str]] = []
    for name, res in episode.resolved_args.items():
        if res.source != FROM_UTTERANCE:
            continue
        if res.span is None:
            raise InvariantViolation(f"argument {name} lacks a span")
        start, end = res.span
        if not (0 <= start < end <= len(tokens)):
            raise InvariantViolation(f"argument {name} span {res.span} outside utterance")
        spans.append((res.span, name))
    spans.sort()
    for ((_, e1), _), ((s2, _), _) in zip(spans, spans[1:]):
        if s2 < e1:
            raise InvariantViolation("overlapping argument spans")

    out: list[str] = []
    covered: set[str] = set()
    pos = 0
    for (start, end), name in spans:
        out.extend(tokens[pos:start])
        out.append(name)
        covered.add(name)
        pos = end
    out.extend(tokens[pos:])

    if not out or all(t in covered for t in out):
        raise DegenerateTemplate(
            f"utterance {episode.original_utterance!r} leaves no words to match on"
        )
    digest = hashlib.sha1(" ".join([episode.resolved_api] + out).encode("utf-8")).hexdigest()
    return SeedCommand(
        sc_id=f"{episode.resolved_api}#learned-{digest[:8]}",
        api_id=episode.resolved_api,
        tokens=tuple(out),
        covered_args=frozenset(covered),
        provenance=Provenance.learned(
            session_id=episode.session_id, timestamp=timestamp or _now_iso()
        ),
    )


def commit_learning(
    kb: KnowledgeBase, episode: LearnEpisode, timestamp: str | None = None
) -> KnowledgeBase:
    """Fold one episode into the KB atomically.

    The returned KB carries the induced seed command (deduplicated), any
    new gazetteer values for elicited arguments, and the usage bigram —
    all under a single version bump. On any error the input KB is returned
    unchanged to the caller (it was never mutated to begin with).
    """
    if episode.kb_version > kb.version:
        raise InvariantViolation(
            f"episode resolved against version {episode.kb_version}, KB is at {kb.version}"
        )
    api = kb.apis.get(episode.resolved_api)
    if api is None:
        raise UnknownApi(episode.resolved_api)
    missing = set(api.arg_names) - set(episode.resolved_args)
    if missing:
        raise InvariantViolation(f"episode lacks arguments {sorted(missing)}")

    sc = induce_seed_command(episode, timestamp=timestamp)
    work = add_seed_command(kb, sc)
    prov = sc.provenance
    for name, res in episode.resolved_args.items():
        if res.source == ELICITED:
            work = add_gazetteer_value(work, api.arg(name).type_name, res.value, provenance=prov)
    work = record_usage(work, episode.context_api, episode.resolved_api)
    return replace(work, version=kb.version + 1)


# -- batch learning over clusters of novel commands ---------------------------


def register_api(kb: KnowledgeBase, api, confirmed: bool = False) -> KnowledgeBase:
    """Add a brand-new API action at runtime.

    A genuinely new command class needs a new target action. This is the
    one mutation a dialogue must not perform silently: the caller has to
    pass ``confirmed=True`` after an explicit confirmation turn, and the
    description must be authored (non-empty), since it is what option lists
    will show to users.
    """
    if not confirmed:
        raise InvariantViolation("registering a new API requires explicit confirmation")
    if api.api_id in kb.apis:
        raise InvariantViolation(f"api {api.api_id!r} already exists")
    if not api.description.strip():
        raise InvariantViolation("a new API needs an authored description")
    for arg in api.args:
        if arg.type_name not in kb.gazetteers:
            raise UnknownType(arg.type_name)
    apis = dict(kb.apis)
    apis[api.api_id] = api
    seed_commands = dict(kb.seed_commands)
    seed_commands.setdefault(api.api_id, ())
    out = replace(kb, apis=apis, seed_commands=seed_commands, version=kb.version + 1)
    out.validate()
    return out


def episodes_from_cluster(
    kb: KnowledgeBase,
    utterances: list[str],
    api_id: str,
    session_id: str,
    fill_args: dict[str, str] | None = None,
) -> list[LearnEpisode]:
    """Turn a cluster of novel commands into episodes under one label.

    Slot values found in each utterance are bound from the gazetteers
    (earliest span first, longer matches preferred); arguments absent from
    an utterance are taken from ``fill_args`` as elicited values. Raises if
    an argument cannot be resolved either way — batch learning has no user
    to ask.
    """
    api = kb.apis.get(api_id)
    if api is None:
        raise UnknownApi(api_id)
    idx = GroundingIndex(kb)
    fill = fill_args or {}
    episodes = []
    for raw in utterances:
        tokens = tuple(normalize(raw))
        taken: list[tuple[int, int]] = []
        resolved: dict[str, ResolvedArg] = {}
        for arg in api.args:
            spans = sorted(
                idx.spans_of_type(tokens, arg.type_name),
                key=lambda bv: (bv.span[0], -(bv.span[1] - bv.span[0])),
            )
            chosen = next(
                (
                    bv
                    for bv in spans
                    if all(bv.span[1] <= s or bv.span[0] >= e for s, e in taken)
                ),
                None,
            )
            if chosen is not None:
                taken.append(chosen.span)
                resolved[arg.name] = ResolvedArg(
                    value=chosen.value, source=FROM_UTTERANCE, span=chosen.span
                )
            elif arg.name in fill:
                resolved[arg.name] = ResolvedArg(value=fill[arg.name], source=ELICITED)
            else:
                raise InvariantViolation(
                    f"{raw!r}: no value for argument {arg.name} "
                    "(not in the utterance, not in fill_args)"
                )
        episodes.append(
            LearnEpisode(
                session_id=session_id,
                original_utterance=raw,
                resolved_api=api_id,
                resolved_args=resolved,
                kb_version=kb.version,
            )
        )
    return episodes
