"""Dialogue manager: a deterministic state machine over grounded commands.

Routing per turn:

* confident + all arguments bound  -> execute
* confident + missing arguments   -> elicit them one by one (signature order)
* uncertain                       -> offer the top-k candidate actions
* novel                           -> ask the user to rephrase

Risk policy: at most ``question_budget`` questions are asked per command
and an option list is never shown for a novel command (guessing among
unrelated options erodes trust faster than asking for a rephrase). When a
command resolves after at least one question, the episode is handed back
to the caller for the learner to commit.

``handle_turn`` is a pure function: it never mutates its input state, and
identical (state, input, KB snapshot) triples produce identical results.
"""

from __future__ import annotations

import enum
import uuid
from dataclasses import dataclass, field, replace

from .characterize import characterize
from .config import EngineConfig
from .errors import InvalidOptionIndex, SessionClosed
from .grounding import Binding, Utterance, ground
from .kb import MAX_PHRASE_TOKENS, KnowledgeBase
from .learning import ELICITED, FROM_UTTERANCE, LearnEpisode, ResolvedArg
from .novelty import Bucket, NoveltyReport, novelty_score
from .textnorm import normalize


class Phase(enum.Enum):
    IDLE = "idle"
    AWAIT_OPTION = "await_option"
    AWAIT_ARG = "await_arg"
    AWAIT_REPHRASE = "await_rephrase"
    DONE = "done"


class ActionKind(enum.Enum):
    EXECUTE = "execute"
    OFFER_OPTIONS = "offer_options"
    ASK_ARG = "ask_arg"
    ASK_REPHRASE = "ask_rephrase"
    GIVE_UP = "give_up"
    SAY = "say"


QUESTION_KINDS = frozenset({ActionKind.OFFER_OPTIONS, ActionKind.ASK_ARG, ActionKind.ASK_REPHRASE})

NONE_OF_THESE = {"none", "none of these", "no", "neither"}


@dataclass(frozen=True)
class OptionItem:
    index: int  # 1-based, as spoken by the user
    api_id: str
    label: str
    binding: Binding


@dataclass(frozen=True)
class AgentAction:
    kind: ActionKind
    text: str = ""
    api_id: str | None = None
    args: dict[str, str] | None = None
    options: tuple[OptionItem, ...] = ()
    arg_name: str | None = None
    arg_type: str | None = None

    @property
    def is_question(self) -> bool:
        return self.kind in QUESTION_KINDS


@dataclass(frozen=True)
class TurnRecord:
    seq: int
    role: str  # "user" | "agent"
    text: str
    action: AgentAction | None = None
    bucket: Bucket | None = None


@dataclass(frozen=True)
class SessionState:
    session_id: str
    kb_version: int
    phase: Phase = Phase.IDLE
    pending_utterance: Utterance | None = None
    pending_api: str | None = None
    pending_options: tuple[OptionItem, ...] = ()
    collected_args: dict[str, ResolvedArg] = field(default_factory=dict)
    awaiting_arg: str | None = None
    questions_asked: int = 0
    rephrases_used: int = 0
    transcript: tuple[TurnRecord, ...] = ()
    last_executed_api: str | None = None

    @property
    def next_seq(self) -> int:
        return len(self.transcript) + 1


def start_session(kb_version: int) -> SessionState:
    """Fresh IDLE session pinned to the KB snapshot it was started against."""
    return SessionState(session_id=uuid.uuid4().hex[:12], kb_version=kb_version)


def close_session(state: SessionState) -> SessionState:
    return replace(state, phase=Phase.DONE)


def risk_gate(bucket: Bucket, questions_asked: int, config: EngineConfig) -> frozenset[ActionKind]:
    """Action kinds the risk policy permits right now.

    A novel command never gets an option list; once the question budget is
    spent no further questions of any kind are allowed.
    """
    base = {
        Bucket.CONFIDENT: {ActionKind.EXECUTE, ActionKind.ASK_ARG},
        Bucket.UNCERTAIN: {ActionKind.OFFER_OPTIONS, ActionKind.ASK_REPHRASE},
        Bucket.NOVEL: {ActionKind.ASK_REPHRASE},
    }[bucket]
    if questions_asked >= config.question_budget:
        base = base - QUESTION_KINDS
        base.add(ActionKind.GIVE_UP)
    return frozenset(base)


# -- internal helpers ----------------------------------------------------------


_GIVE_UP_TEXT = "Sorry, I couldn't work out what you meant. Giving up on this one."
_REPHRASE_TEXT = "Sorry, I didn't understand. Could you say it another way?"
_OPTIONS_HEADER = "Sorry, I didn't get you. Do you mean to:"


def _reset_for_next_command(state: SessionState, last_executed: str | None) -> SessionState:
    return replace(
        state,
        phase=Phase.IDLE,
        pending_utterance=None,
        pending_api=None,
        pending_options=(),
        collected_args={},
        awaiting_arg=None,
        questions_asked=0,
        rephrases_used=0,
        last_executed_api=last_executed or state.last_executed_api,
    )


def _give_up(state: SessionState) -> tuple[SessionState, AgentAction]:
    return _reset_for_next_command(state, None), AgentAction(
        kind=ActionKind.GIVE_UP, text=_GIVE_UP_TEXT
    )


def _ask_rephrase(state: SessionState, config: EngineConfig) -> tuple[SessionState, AgentAction]:
    if (
        state.rephrases_used >= config.rephrase_budget
        or state.questions_asked >= config.question_budget
    ):
        return _give_up(state)
    new = replace(
        state,
        phase=Phase.AWAIT_REPHRASE,
        pending_api=None,
        pending_options=(),
        collected_args={},
        awaiting_arg=None,
        questions_asked=state.questions_asked + 1,
        rephrases_used=state.rephrases_used + 1,
    )
    return new, AgentAction(kind=ActionKind.ASK_REPHRASE, text=_REPHRASE_TEXT)


def _execute(
    state: SessionState, kb: KnowledgeBase
) -> tuple[SessionState, AgentAction, LearnEpisode | None]:
    api = kb.apis[state.pending_api]
    args = {a.name: state.collected_args[a.name].value for a in api.args}
    rendered = ", ".join(f"{a.name}={args[a.name]}" for a in api.args)
    action = AgentAction(
        kind=ActionKind.EXECUTE,
        text=f"Done: {api.api_id}({rendered})",
        api_id=api.api_id,
        args=args,
    )
    episode = None
    if state.questions_asked > 0:
        episode = LearnEpisode(
            session_id=state.session_id,
            original_utterance=state.pending_utterance.raw,
            resolved_api=api.api_id,
            resolved_args=dict(state.collected_args),
            kb_version=kb.version,
            context_api=state.last_executed_api,
        )
    return _reset_for_next_command(state, api.api_id), action, episode


def _elicit_or_execute(
    state: SessionState, kb: KnowledgeBase, config: EngineConfig
) -> tuple[SessionState, AgentAction, LearnEpisode | None]:
    api = kb.apis[state.pending_api]
    missing = [a for a in api.args if a.name not in state.collected_args]
    if not missing:
        return _execute(state, kb)
    if state.questions_asked >= config.question_budget:
        new, action = _give_up(state)
        return new, action, None
    arg = missing[0]
    new = replace(
        state,
        phase=Phase.AWAIT_ARG,
        awaiting_arg=arg.name,
        questions_asked=state.questions_asked + 1,
    )
    action = AgentAction(
        kind=ActionKind.ASK_ARG,
        text=f"Which {arg.type_name} do you mean (for {arg.name})?",
        arg_name=arg.name,
        arg_type=arg.type_name,
    )
    return new, action, None


def _route_utterance(
    state: SessionState, text: str, kb: KnowledgeBase, config: EngineConfig
) -> tuple[SessionState, AgentAction, LearnEpisode | None, NoveltyReport]:
    utterance = Utterance.from_raw(text)
    grounding = ground(utterance, kb)
    report = novelty_score(grounding, gamma=config.gamma, theta_exec=config.theta_exec)
    profile = characterize(utterance, grounding, kb, k=config.top_k)
    allowed = risk_gate(report.bucket, state.questions_asked, config)
    state = replace(
        state,
        pending_utterance=utterance,
        kb_version=kb.version,
        pending_api=None,
        pending_options=(),
        collected_args={},
        awaiting_arg=None,
    )

    if report.bucket is Bucket.CONFIDENT:
        best = grounding.best
        collected = {
            name: ResolvedArg(value=bv.value, source=FROM_UTTERANCE, span=bv.span)
            for name, bv in best.binding.assignments.items()
        }
        state = replace(state, pending_api=best.api_id, collected_args=collected)
        new, action, episode = _elicit_or_execute(state, kb, config)
        return new, action, episode, report

    if report.bucket is Bucket.UNCERTAIN:
        options = []
        for i, near in enumerate(profile.nearest_actions, start=1):
            cand = grounding.best_per_api.get(near.api_id)
            binding = cand.binding if cand is not None else Binding()
            options.append(
                OptionItem(index=i, api_id=near.api_id, label=near.label, binding=binding)
            )
        if ActionKind.OFFER_OPTIONS in allowed and len(options) >= 2:
            new = replace(
                state,
                phase=Phase.AWAIT_OPTION,
                pending_options=tuple(options),
                questions_asked=state.questions_asked + 1,
            )
            action = AgentAction(
                kind=ActionKind.OFFER_OPTIONS, text=_OPTIONS_HEADER, options=tuple(options)
            )
            return new, action, None, report
        new, action = _ask_rephrase(state, config)
        return new, action, None, report

    # novel
    if not config.is_relevant(utterance, report):
        new, action = _give_up(state)
        return new, action, None, report
    if ActionKind.ASK_REPHRASE in allowed:
        new, action = _ask_rephrase(state, config)
    else:
        new, action = _give_up(state)
    return new, action, None, report


def _select_option(
    state: SessionState, text: str, kb: KnowledgeBase, config: EngineConfig
) -> tuple[SessionState, AgentAction, LearnEpisode | None]:
    answer = text.strip().lower().rstrip(".!?")
    if answer in NONE_OF_THESE:
        new, action = _ask_rephrase(state, config)
        return new, action, None
    if answer.startswith("option-") or answer.startswith("option "):
        answer = answer[7:]
    if not answer.isdigit():
        raise InvalidOptionIndex(f"expected 1..{len(state.pending_options)} or 'none'")
    index = int(answer)
    if not (1 <= index <= len(state.pending_options)):
        raise InvalidOptionIndex(f"option {index} is not on the list")
    chosen = state.pending_options[index - 1]
    collected = {
        name: ResolvedArg(value=bv.value, source=FROM_UTTERANCE, span=bv.span)
        for name, bv in chosen.binding.assignments.items()
    }
    state = replace(
        state,
        phase=Phase.IDLE,
        pending_api=chosen.api_id,
        pending_options=(),
        collected_args=collected,
    )
    return _elicit_or_execute(state, kb, config)


def _collect_arg(
    state: SessionState, text: str, kb: KnowledgeBase, config: EngineConfig
) -> tuple[SessionState, AgentAction, LearnEpisode | None]:
    tokens = normalize(text)
    arg = kb.apis[state.pending_api].arg(state.awaiting_arg)
    if not tokens or len(tokens) > MAX_PHRASE_TOKENS:
        # unusable answer: re-ask, still counting against the budget
        if state.questions_asked >= config.question_budget:
            new, action = _give_up(state)
            return new, action, None
        new = replace(state, questions_asked=state.questions_asked + 1)
        action = AgentAction(
            kind=ActionKind.ASK_ARG,
            text=(
                f"I need a short {arg.type_name} phrase "
                f"(at most {MAX_PHRASE_TOKENS} words) for {arg.name}. Which one?"
            ),
            arg_name=arg.name,
            arg_type=arg.type_name,
        )
        return new, action, None
    value = " ".join(tokens)
    collected = dict(state.collected_args)
    collected[arg.name] = ResolvedArg(value=value, source=ELICITED)
    state = replace(state, collected_args=collected, awaiting_arg=None, phase=Phase.IDLE)
    return _elicit_or_execute(state, kb, config)


# -- entry point -------------------------------------------------------------


def handle_turn(
    state: SessionState,
    user_input: str,
    kb: KnowledgeBase,
    config: EngineConfig | None = None,
) -> tuple[SessionState, AgentAction, LearnEpisode | None]:
    """Advance the session by one user turn.

    Returns the successor state, the agent's action, and — when a command
    just resolved through clarification — the learn episode to commit.
    Raises SessionClosed on a DONE session and InvalidOptionIndex for an
    unusable option selection (the state is unchanged in that case).
    """
    config = config or EngineConfig()
    if state.phase is Phase.DONE:
        raise SessionClosed(state.session_id)

    bucket: Bucket | None = None
    if state.phase in (Phase.IDLE, Phase.AWAIT_REPHRASE):
        new, action, episode, report = _route_utterance(state, user_input, kb, config)
        bucket = report.bucket
    elif state.phase is Phase.AWAIT_OPTION:
        new, action, episode = _select_option(state, user_input, kb, config)
    elif state.phase is Phase.AWAIT_ARG:
        new, action, episode = _collect_arg(state, user_input, kb, config)
    else:  # pragma: no cover - exhaustive over Phase
        raise AssertionError(state.phase)

    seq = state.next_seq
    transcript = state.transcript + (
        TurnRecord(seq=seq, role="user", text=user_input),
        TurnRecord(seq=seq + 1, role="agent", text=action.text, action=action, bucket=bucket),
    )
    new = replace(new, transcript=transcript)
    return new, action, episode
