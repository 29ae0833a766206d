"""Novelty detection over grounding results.

A command's novelty with respect to one API is one minus its best grounding
score for that API; the aggregate novelty is the minimum over all known
APIs (a command is only novel if *no* known class explains it). The
aggregate lands in one of three confidence buckets that drive the dialogue
policy:

    CONFIDENT  aggregate <= 1 - theta_exec   (act directly)
    NOVEL      aggregate >= gamma            (ask for a rephrase, learn)
    UNCERTAIN  in between                    (offer the top-k options)

Contextual surprise is a separate signal: a known API invoked in a context
where its smoothed bigram probability is very low.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import EmptyKb, InvalidThresholds, UnknownApi
from .grounding import GroundingIndex, GroundingResult, Utterance, _index_for, _weighted_dice, _wsum
from .kb import START, KnowledgeBase
from collections import Counter

DEFAULT_THETA_EXEC = 0.8
DEFAULT_GAMMA = 0.65
DEFAULT_TAU = 0.05
DEFAULT_MIN_SUPPORT = 20
DEFAULT_DELTA = 0.6


class Bucket(enum.Enum):
    CONFIDENT = "confident"
    UNCERTAIN = "uncertain"
    NOVEL = "novel"


@dataclass(frozen=True)
class NoveltyReport:
    per_class: dict[str, float]
    aggregate: float
    gamma: float
    theta_exec: float
    bucket: Bucket

    @property
    def is_novel(self) -> bool:
        return self.bucket is Bucket.NOVEL


@dataclass(frozen=True)
class SurpriseReport:
    api_id: str
    context: str
    probability: float
    surprising: bool


def confidence_bucket(aggregate: float, theta_exec: float, gamma: float) -> Bucket:
    """Map an aggregate novelty score to its confidence bucket."""
    if not (0.0 <= 1.0 - theta_exec < gamma <= 1.0):
        raise InvalidThresholds(
            f"need 0 <= 1 - theta_exec < gamma <= 1, got theta_exec={theta_exec}, gamma={gamma}"
        )
    if aggregate <= 1.0 - theta_exec:
        return Bucket.CONFIDENT
    if aggregate >= gamma:
        return Bucket.NOVEL
    return Bucket.UNCERTAIN


def novelty_score(
    grounding: GroundingResult,
    gamma: float = DEFAULT_GAMMA,
    theta_exec: float = DEFAULT_THETA_EXEC,
) -> NoveltyReport:
    """Per-class and aggregate novelty for a grounded command."""
    if not grounding.api_scores:
        raise EmptyKb("grounding carries no API scores")
    per_class = {api_id: 1.0 - score for api_id, score in grounding.api_scores.items()}
    aggregate = min(per_class.values())
    return NoveltyReport(
        per_class=per_class,
        aggregate=aggregate,
        gamma=gamma,
        theta_exec=theta_exec,
        bucket=confidence_bucket(aggregate, theta_exec, gamma),
    )


def contextual_surprise(
    kb: KnowledgeBase,
    context: str,
    api_id: str,
    tau: float = DEFAULT_TAU,
    min_support: int = DEFAULT_MIN_SUPPORT,
) -> SurpriseReport:
    """Is this API surprising after ``context``, given the usage counts?

    Probability is add-one smoothed over the known APIs, so it is always
    positive; the surprise flag only fires once the context has been seen
    at least ``min_support`` times.
    """
    if api_id not in kb.apis:
        raise UnknownApi(api_id)
    if context != START and context not in kb.apis:
        raise UnknownApi(context)
    total = kb.context_total(context)
    count = kb.usage.get((context, api_id), 0)
    probability = (count + 1) / (total + len(kb.apis))
    surprising = probability < tau and total >= min_support
    return SurpriseReport(
        api_id=api_id, context=context, probability=probability, surprising=surprising
    )


# -- clustering of accumulated novel commands ---------------------------------


def _masked_counts(tokens: tuple[str, ...], kb: KnowledgeBase, idx: GroundingIndex) -> Counter:
    """Token counts with every gazetteer span (any type) removed."""
    masked = set()
    for type_name in kb.gazetteers:
        for bv in idx.spans_of_type(tokens, type_name):
            masked.update(range(*bv.span))
    return Counter(t for pos, t in enumerate(tokens) if pos not in masked)


def cluster_novel_commands(
    utterances: list[str], kb: KnowledgeBase, delta: float = DEFAULT_DELTA
) -> list[list[str]]:
    """Single-link clusters of commands under the grounding similarity.

    Slot values are masked out first so paraphrases differing only in their
    arguments cluster together. Joining is transitive, i.e. clusters are
    the connected components of the "similarity >= delta" graph. Output is
    canonical: clusters ordered by their smallest member, members sorted.
    """
    if not utterances:
        return []
    idx = _index_for(kb)
    items = sorted(utterances)
    stats = []
    for raw in items:
        counts = _masked_counts(Utterance.from_raw(raw).tokens, kb, idx)
        stats.append((counts, _wsum(counts, idx)))

    parent = list(range(len(items)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            sim = _weighted_dice(stats[i][0], stats[i][1], stats[j][0], stats[j][1], idx)
            if sim >= delta:
                parent[find(j)] = find(i)

    groups: dict[int, list[str]] = {}
    for i, raw in enumerate(items):
        groups.setdefault(find(i), []).append(raw)
    return sorted((sorted(members) for members in groups.values()), key=lambda g: g[0])
