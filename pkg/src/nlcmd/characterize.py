"""Characterization: what the system did and did not understand.

For a grounded command this names the slot spans that bound, the tokens
that matched nothing in the best template, and the nearest known actions.
The dialogue manager turns a characterization into its clarification move;
it is also computed for confident commands for logging and UI purposes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grounding import Binding, GroundingResult, Utterance
from .kb import ApiSpec, KnowledgeBase

DEFAULT_TOP_K = 3


@dataclass(frozen=True)
class NearestAction:
    api_id: str
    score: float
    label: str


@dataclass(frozen=True)
class Characterization:
    utterance: Utterance
    bound_spans: tuple[tuple[str, str, "object"], ...]  # (arg, type, BoundValue)
    matched_tokens: tuple[tuple[int, str], ...]
    ungrounded_tokens: tuple[tuple[int, str], ...]
    nearest_actions: tuple[NearestAction, ...]
    k: int


def render_description(api: ApiSpec, binding: Binding) -> str:
    """Render an API description with bound slot values substituted.

    Description tokens naming an argument are replaced by the bound value,
    or by ``<type>`` when that argument is unbound.
    """
    by_upper = {a.name.upper(): a for a in api.args}
    values = binding.values()
    out = []
    for tok in api.description.split():
        arg = by_upper.get(tok.upper())
        if arg is None:
            out.append(tok)
        elif arg.name in values:
            out.append(values[arg.name])
        else:
            out.append(f"<{arg.type_name}>")
    return " ".join(out)


def characterize(
    utterance: Utterance,
    grounding: GroundingResult,
    kb: KnowledgeBase,
    k: int = DEFAULT_TOP_K,
) -> Characterization:
    """Describe a command in terms of the KB's existing knowledge."""
    if k < 1:
        raise ValueError("k must be >= 1")
    best = grounding.best
    bound_spans: list[tuple[str, str, object]] = []
    bound_positions: set[int] = set()
    sc_words: frozenset[str] = frozenset()
    if best is not None:
        api = kb.apis[best.api_id]
        arg_types = {a.name: a.type_name for a in api.args}
        for name in sorted(best.binding.assignments):
            bv = best.binding.assignments[name]
            bound_spans.append((name, arg_types[name], bv))
            bound_positions.update(range(*bv.span))
        sc_words = frozenset(kb.find_sc(best.api_id, best.sc_id).word_tokens)

    matched: list[tuple[int, str]] = []
    ungrounded: list[tuple[int, str]] = []
    for pos, tok in enumerate(utterance.tokens):
        if pos in bound_positions:
            continue
        (matched if tok in sc_words else ungrounded).append((pos, tok))

    nearest = []
    for api_id, score in grounding.top_apis(k):
        api = kb.apis[api_id]
        cand = grounding.best_per_api.get(api_id)
        binding = cand.binding if cand is not None else Binding()
        nearest.append(
            NearestAction(api_id=api_id, score=score, label=render_description(api, binding))
        )

    return Characterization(
        utterance=utterance,
        bound_spans=tuple(bound_spans),
        matched_tokens=tuple(matched),
        ungrounded_tokens=tuple(ungrounded),
        nearest_actions=tuple(nearest),
        k=k,
    )
