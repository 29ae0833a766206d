"""Command grounding: bind typed slots, score templates, rank candidates.

Similarity is an IDF-weighted Dice coefficient over token multisets: the
utterance tokens left over after removing bound slot spans are compared with
the seed command's word tokens (variables removed). IDF weights come from
the KB's *authored* seed commands only, so weights are stable while the
system learns — per-API scores can then only grow as templates and
gazetteer values are added. Tokens outside the authored corpus get the
maximum corpus IDF.

A candidate whose residuals match exactly but whose variables are not all
bound scores just below 1.0: a perfect score is reserved for a complete
grounding.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .errors import EmptyKb
from .kb import KnowledgeBase, SeedCommand
from .textnorm import normalize

#: Score assigned when residuals match but some variable stayed unbound.
_ALMOST_ONE = math.nextafter(1.0, 0.0)

#: Determiners a slot span may absorb ("the kitchen" binds value "kitchen").
ARTICLES = frozenset({"the", "a", "an"})


@dataclass(frozen=True)
class Utterance:
    """A user command: the raw string plus its normalized tokens."""

    raw: str
    tokens: tuple[str, ...]

    @classmethod
    def from_raw(cls, raw: str) -> "Utterance":
        return cls(raw=raw, tokens=tuple(normalize(raw)))


@dataclass(frozen=True)
class BoundValue:
    """A slot value found in the utterance: phrase plus [start, end) span."""

    value: str
    span: tuple[int, int]


@dataclass(frozen=True)
class Binding:
    """Argument-name → bound value assignments with non-overlapping spans."""

    assignments: dict[str, BoundValue] = field(default_factory=dict)

    def arg_names(self) -> frozenset[str]:
        return frozenset(self.assignments)

    def spans(self) -> list[tuple[int, int]]:
        return [bv.span for bv in self.assignments.values()]

    def values(self) -> dict[str, str]:
        return {name: bv.value for name, bv in self.assignments.items()}


EMPTY_BINDING = Binding()


@dataclass(frozen=True)
class GroundingCandidate:
    api_id: str
    sc_id: str
    binding: Binding
    score: float


@dataclass(frozen=True)
class GroundingResult:
    """Ranked grounding candidates for one utterance.

    ``candidates`` holds, for every seed command, its best-scoring binding —
    provided the score is positive — sorted by (score desc, api_id asc,
    sc_id asc). ``api_scores`` covers *every* API in the KB (0.0 when
    nothing matched), which is what novelty scoring consumes.
    """

    utterance: Utterance
    candidates: tuple[GroundingCandidate, ...]
    best_per_api: dict[str, GroundingCandidate]
    api_scores: dict[str, float]

    @property
    def best(self) -> GroundingCandidate | None:
        return self.candidates[0] if self.candidates else None

    def top_apis(self, k: int) -> list[tuple[str, float]]:
        """All APIs by (score desc, api_id asc), truncated to k."""
        ranked = sorted(self.api_scores.items(), key=lambda it: (-it[1], it[0]))
        return ranked[:k]


# -- IDF / per-KB index ------------------------------------------------------


class GroundingIndex:
    """Precomputed matching tables for one KB snapshot."""

    def __init__(self, kb: KnowledgeBase):
        self.version = kb.version
        authored = [sc for sc in kb.all_seed_commands() if not sc.provenance.is_learned]
        n = len(authored)
        df: Counter[str] = Counter()
        for sc in authored:
            df.update(set(sc.word_tokens))
        self.idf: dict[str, float] = {
            tok: 1.0 + math.log((1.0 + n) / (1.0 + d)) for tok, d in df.items()
        }
        self.default_idf: float = max(self.idf.values(), default=1.0)
        # per-SC word stats and a token -> SCs posting list; an SC sharing no
        # word with the utterance can only score 0 (unless it has no word
        # tokens at all), so grounding skips it entirely
        self.sc_stats: dict[tuple[str, str], tuple[Counter, float]] = {}
        self.postings: dict[str, set[tuple[str, str]]] = {}
        self.wordless_scs: set[tuple[str, str]] = set()
        for sc in kb.all_seed_commands():
            counts = Counter(sc.word_tokens)
            key = (sc.api_id, sc.sc_id)
            self.sc_stats[key] = (counts, _wsum(counts, self))
            if not counts:
                self.wordless_scs.add(key)
            for tok in counts:
                self.postings.setdefault(tok, set()).add(key)
        # gazetteer phrase tables: type -> (set of token tuples, max phrase len)
        self.phrase_tables: dict[str, tuple[set[tuple[str, ...]], int]] = {}
        for type_name, gaz in kb.gazetteers.items():
            phrases = {tuple(p.split()) for p in gaz.values}
            max_len = max((len(p) for p in phrases), default=0)
            self.phrase_tables[type_name] = (phrases, max_len)

    def weight(self, token: str) -> float:
        return self.idf.get(token, self.default_idf)

    def spans_of_type(self, tokens: tuple[str, ...], type_name: str) -> list[BoundValue]:
        """Every gazetteer phrase of the type occurring in the tokens.

        All matches are kept (not only the longest per position) so that
        growing a gazetteer can only grow the set of enumerable bindings.
        A phrase preceded by an article also yields an article-absorbing
        span (same value, one token wider); scoring decides which variant
        fits the template.
        """
        table = self.phrase_tables.get(type_name)
        if table is None:
            return []
        phrases, max_len = table
        found = []
        for start in range(len(tokens)):
            for length in range(1, min(max_len, len(tokens) - start) + 1):
                window = tokens[start : start + length]
                if window in phrases:
                    value = " ".join(window)
                    found.append(BoundValue(value, (start, start + length)))
                    if start > 0 and tokens[start - 1] in ARTICLES:
                        found.append(BoundValue(value, (start - 1, start + length)))
        return found


def _index_for(kb: KnowledgeBase) -> GroundingIndex:
    idx = getattr(kb, "_grounding_index", None)
    if idx is None or idx.version != kb.version:
        idx = GroundingIndex(kb)
        kb._grounding_index = idx
    return idx


# -- scoring -----------------------------------------------------------------
#
# All weighted sums iterate tokens in sorted order so that any two
# implementations of the same formula produce bit-identical floats.


def _wsum(counts: Counter, idx: GroundingIndex) -> float:
    return sum(idx.weight(t) * c for t, c in sorted(counts.items()))


def _weighted_dice(
    u_counts: Counter, u_sum: float, s_counts: Counter, s_sum: float, idx: GroundingIndex
) -> float:
    if u_sum == 0.0 and s_sum == 0.0:
        return 1.0
    small, big = (u_counts, s_counts) if len(u_counts) <= len(s_counts) else (s_counts, u_counts)
    inter = sum(
        idx.weight(tok) * min(c, big[tok]) for tok, c in sorted(small.items()) if tok in big
    )
    if inter == 0.0:
        return 0.0
    return (2.0 * inter) / (u_sum + s_sum)


def _utterance_stats(tokens: tuple[str, ...], idx: GroundingIndex) -> tuple[Counter, float]:
    counts = Counter(tokens)
    return counts, _wsum(counts, idx)


def _residual(
    tokens: tuple[str, ...],
    counts: Counter,
    wsum: float,
    binding: Binding,
    idx: GroundingIndex,
) -> tuple[Counter, float]:
    if not binding.assignments:
        return counts, wsum
    res = Counter(counts)
    for start, end in binding.spans():
        for pos in range(start, end):
            tok = tokens[pos]
            res[tok] -= 1
            if res[tok] == 0:
                del res[tok]
    return res, _wsum(res, idx)


def score_candidate(
    utterance: Utterance, sc: SeedCommand, binding: Binding, kb: KnowledgeBase
) -> float:
    """Similarity in [0, 1] of the utterance to one (template, binding)."""
    idx = _index_for(kb)
    u_counts, u_sum = _utterance_stats(utterance.tokens, idx)
    r_counts, r_sum = _residual(utterance.tokens, u_counts, u_sum, binding, idx)
    s_counts, s_sum = idx.sc_stats.get((sc.api_id, sc.sc_id)) or _sc_stats_uncached(sc, idx)
    score = _weighted_dice(r_counts, r_sum, s_counts, s_sum, idx)
    if score >= 1.0 and (sc.covered_args - binding.arg_names()):
        return _ALMOST_ONE
    return score


def _sc_stats_uncached(sc: SeedCommand, idx: GroundingIndex) -> tuple[Counter, float]:
    counts = Counter(sc.word_tokens)
    return counts, _wsum(counts, idx)


# -- binding enumeration -------------------------------------------------------


def _enumerate(
    tokens: tuple[str, ...],
    sc: SeedCommand,
    arg_types: dict[str, str],
    idx: GroundingIndex,
    span_cache: dict[str, list[BoundValue]],
) -> list[Binding]:
    if not sc.covered_args or not tokens:
        return [EMPTY_BINDING]
    span_options: list[tuple[str, list[BoundValue]]] = []
    for name in sorted(sc.covered_args):
        type_name = arg_types[name]
        hits = span_cache.get(type_name)
        if hits is None:
            hits = idx.spans_of_type(tokens, type_name)
            span_cache[type_name] = hits
        if hits:
            span_options.append((name, hits))
    if not span_options:
        return [EMPTY_BINDING]
    partial: list[dict[str, BoundValue]] = [{}]
    for name, hits in span_options:
        extended = []
        for assignment in partial:
            extended.append(assignment)  # variable left unbound
            taken = [bv.span for bv in assignment.values()]
            for hit in hits:
                if all(hit.span[1] <= s or hit.span[0] >= e for s, e in taken):
                    new = dict(assignment)
                    new[name] = hit
                    extended.append(new)
        partial = extended
    return [Binding(assignments=a) if a else EMPTY_BINDING for a in partial]


def enumerate_bindings(
    utterance: Utterance, sc: SeedCommand, kb: KnowledgeBase
) -> list[Binding]:
    """All consistent slot assignments for the template over the utterance.

    Every subset of the template's variables may be bound; candidate spans
    for a variable are the gazetteer phrases of its type found anywhere in
    the utterance; spans must not overlap. The empty binding is always
    included, so a command that names no slot value still gets scored.
    """
    idx = _index_for(kb)
    api = kb.apis[sc.api_id]
    arg_types = {a.name: a.type_name for a in api.args}
    return _enumerate(utterance.tokens, sc, arg_types, idx, {})


def _binding_preference(binding: Binding) -> tuple:
    """Deterministic tie-break among equal-score bindings.

    Prefer more covered text (longest match), then more bound variables,
    then the lexicographically smallest (arg, span) sequence.
    """
    covered = sum(end - start for start, end in binding.spans())
    items = tuple(sorted((name, bv.span, bv.value) for name, bv in binding.assignments.items()))
    return (-covered, -len(binding.assignments), items)


# -- full grounding ------------------------------------------------------------


def ground(utterance: Utterance, kb: KnowledgeBase) -> GroundingResult:
    """Score every seed command at its best binding and rank the results."""
    if not kb.apis:
        raise EmptyKb("knowledge base declares no APIs")
    idx = _index_for(kb)
    u_counts, u_sum = _utterance_stats(utterance.tokens, idx)
    span_cache: dict[str, list[BoundValue]] = {}
    reachable = set(idx.wordless_scs)
    for tok in u_counts:
        reachable.update(idx.postings.get(tok, ()))

    candidates: list[GroundingCandidate] = []
    api_scores: dict[str, float] = {}
    for api_id in kb.apis:
        api_scores[api_id] = 0.0
        api = kb.apis[api_id]
        arg_types = {a.name: a.type_name for a in api.args}
        for sc in kb.seed_commands.get(api_id, ()):
            if (api_id, sc.sc_id) not in reachable:
                continue
            s_counts, s_sum = idx.sc_stats[(api_id, sc.sc_id)]
            best_score = -1.0
            best_binding = EMPTY_BINDING
            for binding in _enumerate(utterance.tokens, sc, arg_types, idx, span_cache):
                r_counts, r_sum = _residual(utterance.tokens, u_counts, u_sum, binding, idx)
                score = _weighted_dice(r_counts, r_sum, s_counts, s_sum, idx)
                if score >= 1.0 and (sc.covered_args - binding.arg_names()):
                    score = _ALMOST_ONE
                if score > best_score or (
                    score == best_score
                    and _binding_preference(binding) < _binding_preference(best_binding)
                ):
                    best_score = score
                    best_binding = binding
            if best_score > 0.0:
                candidates.append(
                    GroundingCandidate(
                        api_id=api_id, sc_id=sc.sc_id, binding=best_binding, score=best_score
                    )
                )
                if best_score > api_scores[api_id]:
                    api_scores[api_id] = best_score

    candidates.sort(key=lambda c: (-c.score, c.api_id, c.sc_id))
    best_per_api: dict[str, GroundingCandidate] = {}
    for cand in candidates:
        if cand.api_id not in best_per_api:
            best_per_api[cand.api_id] = cand
    return GroundingResult(
        utterance=utterance,
        candidates=tuple(candidates),
        best_per_api=best_per_api,
        api_scores=api_scores,
    )
