import math
import random

import pytest

from nlcmd import (
    Binding,
    BoundValue,
    Utterance,
    add_seed_command,
    enumerate_bindings,
    ground,
    parse_spec,
    score_candidate,
)
from nlcmd.errors import EmptyKb
from nlcmd.kb import KnowledgeBase, Provenance, SeedCommand

from genkb import random_kb, random_utterance_tokens
from oracles import o_api_scores, o_assignments, o_ground_ranking, o_score

SINGLE_SC = """
type location = { bedroom, kitchen }
api SwitchOnLight(X1: location) "switch on the light in the X1"
  sc "Switch on the light in X1"
"""


@pytest.fixture()
def single_kb():
    # one seed command -> every template token has the same document
    # frequency, so IDF weighting degenerates to uniform weights
    return parse_spec(SINGLE_SC)


def _utt(s):
    return Utterance.from_raw(s)


def _sc(kb, api_id, i=0):
    return kb.seed_commands[api_id][i]


class TestEnumerateBindings:
    def test_single_hit_plus_empty_and_absorbed(self, single_kb):
        utt = _utt("switch on the light in the bedroom")
        sc = _sc(single_kb, "SwitchOnLight")
        got = enumerate_bindings(utt, sc, single_kb)
        as_sets = {tuple(sorted((n, bv.value, bv.span) for n, bv in b.assignments.items())) for b in got}
        assert as_sets == {
            (),
            (("X1", "bedroom", (6, 7)),),
            (("X1", "bedroom", (5, 7)),),  # "the bedroom"
        }

    def test_no_hits_only_empty(self, single_kb):
        got = enumerate_bindings(_utt("make it warmer"), _sc(single_kb, "SwitchOnLight"), single_kb)
        assert got == [Binding()]

    def test_two_slots(self, demo_kb):
        utt = _utt("change the bedroom light to blue")
        sc = _sc(demo_kb, "ChangeLightColor")
        got = enumerate_bindings(utt, sc, demo_kb)
        wanted = {"X1": "bedroom", "X2": "blue"}
        assert any(b.values() == wanted for b in got)

    def test_matches_oracle_enumeration(self, demo_kb):
        rng = random.Random(11)
        for _ in range(30):
            tokens = random_utterance_tokens(rng, demo_kb)
            tokens += ["bedroom", "blue"]  # force some hits
            utt = Utterance(raw=" ".join(tokens), tokens=tuple(tokens))
            for api_id in demo_kb.apis:
                for sc in demo_kb.seed_commands[api_id]:
                    got = {
                        tuple(sorted((n, bv.value, bv.span) for n, bv in b.assignments.items()))
                        for b in enumerate_bindings(utt, sc, demo_kb)
                    }
                    want = {
                        tuple(sorted((n, v, s) for n, (v, s) in a.items()))
                        for a in o_assignments(tuple(tokens), sc, demo_kb)
                    }
                    assert got == want

    def test_overlapping_spans_excluded(self, demo_kb):
        # "living room" and "room"-like overlaps: two variables may not
        # claim overlapping token ranges
        utt = _utt("change the living room light to blue")
        sc = _sc(demo_kb, "ChangeLightColor")
        for b in enumerate_bindings(utt, sc, demo_kb):
            spans = sorted(bv.span for bv in b.assignments.values())
            for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
                assert e1 <= s2


class TestScoreCandidate:
    def test_uniform_dice_frozen_value(self, single_kb):
        # bare span keeps the second "the": residual 6 tokens vs 5 template
        # words sharing 5 -> 2*5/(6+5)
        utt = _utt("switch on the light in the bedroom")
        sc = _sc(single_kb, "SwitchOnLight")
        binding = Binding({"X1": BoundValue("bedroom", (6, 7))})
        assert score_candidate(utt, sc, binding, single_kb) == pytest.approx(10 / 11)
        assert score_candidate(utt, sc, binding, single_kb) == o_score(
            utt.tokens, sc, {"X1": ("bedroom", (6, 7))}, single_kb, uniform=True
        )

    def test_exact_after_binding_scores_one(self, single_kb):
        utt = _utt("switch on the light in bedroom")
        sc = _sc(single_kb, "SwitchOnLight")
        binding = Binding({"X1": BoundValue("bedroom", (5, 6))})
        assert score_candidate(utt, sc, binding, single_kb) == 1.0

    def test_article_absorbing_binding_scores_one(self, single_kb):
        utt = _utt("switch on the light in the bedroom")
        sc = _sc(single_kb, "SwitchOnLight")
        binding = Binding({"X1": BoundValue("bedroom", (5, 7))})
        assert score_candidate(utt, sc, binding, single_kb) == 1.0

    def test_disjoint_vocabulary(self, single_kb):
        utt = _utt("frobnicate quux")
        sc = _sc(single_kb, "SwitchOnLight")
        assert score_candidate(utt, sc, Binding(), single_kb) == 0.0

    def test_unbound_variable_never_scores_one(self, demo_kb):
        # residuals match the template words exactly, but X1/X2 are unbound
        utt = _utt("change the light to")
        sc = _sc(demo_kb, "ChangeLightColor")
        score = score_candidate(utt, sc, Binding(), demo_kb)
        assert score == math.nextafter(1.0, 0.0)

    def test_score_bounds_random(self, demo_kb):
        rng = random.Random(5)
        for _ in range(60):
            tokens = tuple(random_utterance_tokens(rng, demo_kb))
            utt = Utterance(raw=" ".join(tokens), tokens=tokens)
            for api_id in demo_kb.apis:
                for sc in demo_kb.seed_commands[api_id]:
                    for b in enumerate_bindings(utt, sc, demo_kb):
                        assert 0.0 <= score_candidate(utt, sc, b, demo_kb) <= 1.0

    def test_score_one_iff_exact_and_fully_bound(self):
        from collections import Counter

        rng = random.Random(41)
        for _ in range(25):
            kb = random_kb(rng)
            for _ in range(10):
                tokens = tuple(random_utterance_tokens(rng, kb))
                utt = Utterance(raw=" ".join(tokens), tokens=tokens)
                for api_id in kb.apis:
                    for sc in kb.seed_commands[api_id]:
                        for b in enumerate_bindings(utt, sc, kb):
                            removed = set()
                            for s, e in b.spans():
                                removed.update(range(s, e))
                            residual = Counter(
                                t for i, t in enumerate(tokens) if i not in removed
                            )
                            exact = residual == Counter(sc.word_tokens)
                            fully = sc.covered_args <= b.arg_names()
                            score = score_candidate(utt, sc, b, kb)
                            assert (score == 1.0) == (exact and fully)


class TestGround:
    def test_demo_ranking_matches_reference_dialogue_order(self, demo_kb):
        g = ground(_utt("Turn off the light in the kitchen"), demo_kb)
        by_api = [(a, s) for a, s in g.top_apis(3)]
        assert [a for a, _ in by_api] == ["SwitchOffLight", "SwitchOnLight", "ChangeLightColor"]
        assert g.best.api_id == "SwitchOffLight"
        assert g.best.binding.values() == {"X1": "kitchen"}

    def test_demo_ranking_uniform_dice_frozen(self, demo_kb):
        # per-API bests under uniform weights, frozen from the brute-force
        # oracle: the article-absorbing binding wins for every API here
        tokens = tuple(_utt("Turn off the light in the kitchen").tokens)
        best = {}
        for api_id in demo_kb.apis:
            scores = []
            for sc in demo_kb.seed_commands[api_id]:
                for a in o_assignments(tokens, sc, demo_kb):
                    scores.append(o_score(tokens, sc, a, demo_kb, uniform=True))
            best[api_id] = max(scores)
        assert best["SwitchOffLight"] == pytest.approx(8 / 10)
        assert best["SwitchOnLight"] == pytest.approx(6 / 10)
        assert best["ChangeLightColor"] == pytest.approx(4 / 9)
        ranked = sorted(best, key=lambda a: -best[a])
        assert ranked == ["SwitchOffLight", "SwitchOnLight", "ChangeLightColor"]

    def test_direct_command_scores_one(self, demo_kb):
        g = ground(_utt("Switch on the light in the bedroom"), demo_kb)
        assert g.best.api_id == "SwitchOnLight"
        assert g.best.score == 1.0

    def test_empty_utterance_all_zero(self, demo_kb):
        g = ground(_utt(""), demo_kb)
        assert g.candidates == ()
        assert set(g.api_scores.values()) == {0.0}

    def test_empty_kb(self):
        with pytest.raises(EmptyKb):
            ground(_utt("anything"), KnowledgeBase())

    def test_deterministic(self, demo_kb):
        a = ground(_utt("put off light in the kitchen please"), demo_kb)
        b = ground(_utt("put off light in the kitchen please"), demo_kb)
        assert a == b

    def test_candidates_positive_and_sorted(self, demo_kb):
        g = ground(_utt("turn off the kitchen light"), demo_kb)
        keys = [(-c.score, c.api_id, c.sc_id) for c in g.candidates]
        assert keys == sorted(keys)
        assert all(c.score > 0 for c in g.candidates)

    def test_matches_oracle_small(self, demo_kb):
        rng = random.Random(23)
        for _ in range(40):
            tokens = tuple(random_utterance_tokens(rng, demo_kb))
            utt = Utterance(raw=" ".join(tokens), tokens=tokens)
            g = ground(utt, demo_kb)
            want = o_ground_ranking(tokens, demo_kb)
            got = [(c.api_id, c.sc_id, c.score) for c in g.candidates]
            assert got == want
            assert g.api_scores == o_api_scores(tokens, demo_kb)

    def test_matches_oracle_random_kbs(self):
        rng = random.Random(99)
        for _ in range(15):
            kb = random_kb(rng)
            for _ in range(8):
                tokens = tuple(random_utterance_tokens(rng, kb))
                utt = Utterance(raw=" ".join(tokens), tokens=tokens)
                got = [(c.api_id, c.sc_id, c.score) for c in ground(utt, kb).candidates]
                assert got == o_ground_ranking(tokens, kb)

    def test_monotone_under_teaching(self, demo_kb):
        rng = random.Random(3)
        utterances = [tuple(random_utterance_tokens(rng, demo_kb)) for _ in range(25)]
        before = [
            ground(Utterance(raw=" ".join(t), tokens=t), demo_kb).api_scores for t in utterances
        ]
        sc = SeedCommand(
            sc_id="SwitchOffLight#learned-x",
            api_id="SwitchOffLight",
            tokens=("kill", "the", "light", "in", "X1"),
            covered_args=frozenset({"X1"}),
            provenance=Provenance.learned("s", "t"),
        )
        kb2 = add_seed_command(demo_kb, sc)
        for tokens, prior in zip(utterances, before):
            after = ground(Utterance(raw=" ".join(tokens), tokens=tokens), kb2).api_scores
            for api_id, old in prior.items():
                assert after[api_id] >= old
