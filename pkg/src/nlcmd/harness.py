"""Evaluation harness: a simulated user drives dialogues over a corpus.

Each corpus item carries the utterance, the ground-truth API and argument
values, and optional alternative paraphrasings (used to answer rephrase
requests). The repeat protocol runs the corpus twice with learning enabled;
because learning is additive and self-consistent, the second pass can only
get more accurate and ask fewer questions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .config import EngineConfig
from .dialogue import ActionKind, AgentAction, handle_turn, start_session
from .errors import CorpusError, DegenerateTemplate, OracleExhausted
from .grounding import Utterance, ground
from .kb import KnowledgeBase
from .learning import commit_learning

_MAX_TURNS = 50  # hard stop; budgets terminate dialogues far earlier


@dataclass(frozen=True)
class CorpusItem:
    utterance: str
    gold_api: str
    gold_args: dict[str, str] = field(default_factory=dict)
    alt_paraphrases: tuple[str, ...] = ()
    context: str | None = None


class SimulatedUser:
    """Answers the agent's questions from a corpus item's ground truth."""

    def __init__(self, item: CorpusItem):
        self.item = item
        self._rephrases_given = 0
        self._repeated_original = False

    def respond(self, action: AgentAction) -> str:
        if action.kind is ActionKind.OFFER_OPTIONS:
            for opt in action.options:
                if opt.api_id == self.item.gold_api:
                    return str(opt.index)
            return "none"
        if action.kind is ActionKind.ASK_ARG:
            value = self.item.gold_args.get(action.arg_name)
            if value is None:
                raise OracleExhausted(f"no gold value for argument {action.arg_name}")
            return value
        if action.kind is ActionKind.ASK_REPHRASE:
            if self._rephrases_given < len(self.item.alt_paraphrases):
                self._rephrases_given += 1
                return self.item.alt_paraphrases[self._rephrases_given - 1]
            if not self._repeated_original:
                self._repeated_original = True
                return self.item.utterance
            raise OracleExhausted("out of paraphrases")
        raise OracleExhausted(f"cannot answer action kind {action.kind}")


@dataclass(frozen=True)
class ItemResult:
    pass_no: int
    utterance: str
    gold_api: str
    executed_api: str | None
    executed_args: dict[str, str] | None
    correct: bool
    questions: int
    taught: bool
    topk_hit: bool
    gave_up: bool


@dataclass
class EvalReport:
    n: int
    exec_accuracy: float | None
    topk_hit_rate: float | None
    mean_questions: float | None
    learned_sc_count: int
    pass1_accuracy: float | None
    pass2_accuracy: float | None
    pass1_mean_questions: float | None
    pass2_mean_questions: float | None
    per_item: tuple[ItemResult, ...] = ()
    final_kb: KnowledgeBase | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "exec_accuracy": self.exec_accuracy,
            "topk_hit_rate": self.topk_hit_rate,
            "mean_questions": self.mean_questions,
            "learned_sc_count": self.learned_sc_count,
            "pass1_accuracy": self.pass1_accuracy,
            "pass2_accuracy": self.pass2_accuracy,
            "pass1_mean_questions": self.pass1_mean_questions,
            "pass2_mean_questions": self.pass2_mean_questions,
            "items": [
                {
                    "pass": r.pass_no,
                    "utterance": r.utterance,
                    "gold_api": r.gold_api,
                    "executed_api": r.executed_api,
                    "executed_args": r.executed_args,
                    "correct": r.correct,
                    "questions": r.questions,
                    "taught": r.taught,
                    "topk_hit": r.topk_hit,
                    "gave_up": r.gave_up,
                }
                for r in self.per_item
            ],
        }

    def to_json_bytes(self) -> bytes:
        return (json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n").encode("utf-8")


# -- corpus I/O ----------------------------------------------------------------


def parse_corpus(text: str) -> list[CorpusItem]:
    """Parse line-delimited JSON corpus records."""
    items = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            items.append(
                CorpusItem(
                    utterance=doc["utterance"],
                    gold_api=doc["gold_api"],
                    gold_args=dict(doc.get("gold_args", {})),
                    alt_paraphrases=tuple(doc.get("alt_paraphrases", ())),
                    context=doc.get("context"),
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CorpusError(f"corpus line {lineno}: {exc!r}") from exc
    return items


def load_corpus(path: str | Path) -> list[CorpusItem]:
    return parse_corpus(Path(path).read_text("utf-8"))


def validate_corpus(kb: KnowledgeBase, items: list[CorpusItem]) -> None:
    """Check every item resolves against the KB before any session runs."""
    for i, item in enumerate(items, start=1):
        api = kb.apis.get(item.gold_api)
        if api is None:
            raise CorpusError(f"item {i}: unknown gold_api {item.gold_api!r}")
        missing = set(api.arg_names) - set(item.gold_args)
        if missing:
            raise CorpusError(f"item {i}: gold_args missing {sorted(missing)}")
        unknown = set(item.gold_args) - set(api.arg_names)
        if unknown:
            raise CorpusError(f"item {i}: gold_args has unknown names {sorted(unknown)}")
        if item.context is not None and item.context not in kb.apis:
            raise CorpusError(f"item {i}: unknown context {item.context!r}")


# -- the driver ------------------------------------------------------------------


def _run_item(
    kb: KnowledgeBase, item: CorpusItem, config: EngineConfig, pass_no: int
) -> tuple[ItemResult, KnowledgeBase]:
    state = start_session(kb.version)
    if item.context is not None:
        state = replace(state, last_executed_api=item.context)

    topk = [a for a, _ in ground(Utterance.from_raw(item.utterance), kb).top_apis(config.top_k)]
    topk_hit = item.gold_api in topk

    oracle = SimulatedUser(item)
    text = item.utterance
    questions = 0
    taught = False
    executed_api: str | None = None
    executed_args: dict[str, str] | None = None
    gave_up = False
    for _ in range(_MAX_TURNS):
        state, action, episode = handle_turn(state, text, kb, config)
        if action.is_question:
            questions += 1
        if episode is not None:
            try:
                kb = commit_learning(kb, episode)
                taught = True
            except DegenerateTemplate:
                pass  # nothing template-worthy in this utterance
        if action.kind is ActionKind.EXECUTE:
            executed_api = action.api_id
            executed_args = action.args
            break
        if action.kind is ActionKind.GIVE_UP:
            gave_up = True
            break
        try:
            text = oracle.respond(action)
        except OracleExhausted:
            gave_up = True
            break
    correct = executed_api == item.gold_api and executed_args == item.gold_args
    return (
        ItemResult(
            pass_no=pass_no,
            utterance=item.utterance,
            gold_api=item.gold_api,
            executed_api=executed_api,
            executed_args=executed_args,
            correct=correct,
            questions=questions,
            taught=taught,
            topk_hit=topk_hit,
            gave_up=gave_up,
        ),
        kb,
    )


def run_corpus(
    kb: KnowledgeBase,
    corpus: list[CorpusItem],
    config: EngineConfig | None = None,
    passes: int = 2,
) -> EvalReport:
    """Run every item as a full dialogue, learning as it goes.

    With ``passes=2`` (the repeat protocol) the corpus is replayed against
    the learned KB and per-pass accuracy is reported separately.
    """
    config = (config or EngineConfig()).validate()
    if passes < 1:
        raise ValueError("passes must be >= 1")
    validate_corpus(kb, corpus)

    results: list[ItemResult] = []
    for pass_no in range(1, passes + 1):
        for item in corpus:
            result, kb = _run_item(kb, item, config, pass_no)
            results.append(result)

    def _rate(rs: list[ItemResult], pick) -> float | None:
        if not rs:
            return None
        return sum(pick(r) for r in rs) / len(rs)

    pass1 = [r for r in results if r.pass_no == 1]
    pass2 = [r for r in results if r.pass_no == 2]
    report = EvalReport(
        n=len(corpus),
        exec_accuracy=_rate(results, lambda r: r.correct),
        topk_hit_rate=_rate(results, lambda r: r.topk_hit),
        mean_questions=_rate(results, lambda r: r.questions),
        learned_sc_count=kb.learned_sc_count(),
        pass1_accuracy=_rate(pass1, lambda r: r.correct),
        pass2_accuracy=_rate(pass2, lambda r: r.correct),
        pass1_mean_questions=_rate(pass1, lambda r: r.questions),
        pass2_mean_questions=_rate(pass2, lambda r: r.questions),
        per_item=tuple(results),
        final_kb=kb,
    )
    return report
