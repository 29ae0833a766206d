"""Session runtime: the single KB writer shared by REPL and service.

Sessions read immutable KB snapshots; every mutation (committing a learn
episode, recording usage for a direct execute) goes through this object
under one lock. Executes are dispatched to a pluggable action sink — the
default just logs, since real API invocation belongs to the host
application.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .config import EngineConfig
from .dialogue import (
    ActionKind,
    AgentAction,
    SessionState,
    close_session,
    handle_turn,
    start_session,
)
from .errors import DegenerateTemplate, EngineError
from .kb import KnowledgeBase, record_usage, save_kb
from .learning import commit_learning

logger = logging.getLogger(__name__)

ActionSink = Callable[[str, dict], None]


def log_executor(api_id: str, args: dict) -> None:
    logger.info("execute %s(%s)", api_id, ", ".join(f"{k}={v}" for k, v in args.items()))


@dataclass(frozen=True)
class TurnOutcome:
    session_id: str
    action: AgentAction
    learned: bool
    kb_version: int
    new_records: tuple  # the two TurnRecords appended this turn


class EngineRuntime:
    """Owns the live KB and all dialogue sessions."""

    def __init__(
        self,
        kb: KnowledgeBase,
        config: EngineConfig | None = None,
        executor: ActionSink | None = None,
        kb_path: str | Path | None = None,
    ):
        self._lock = threading.RLock()
        self._kb = kb
        self.config = (config or EngineConfig()).validate()
        self.executor = executor or log_executor
        self.kb_path = Path(kb_path) if kb_path else None
        self._sessions: dict[str, SessionState] = {}
        self.dirty = False

    # -- KB access --------------------------------------------------------

    @property
    def kb(self) -> KnowledgeBase:
        with self._lock:
            return self._kb

    def kb_summary(self) -> dict:
        kb = self.kb
        apis = []
        for api in kb.apis.values():
            scs = kb.seed_commands.get(api.api_id, ())
            learned = sum(1 for sc in scs if sc.provenance.is_learned)
            apis.append(
                {
                    "api_id": api.api_id,
                    "description": api.description,
                    "args": [{"name": a.name, "type": a.type_name} for a in api.args],
                    "sc_total": len(scs),
                    "sc_authored": len(scs) - learned,
                    "sc_learned": learned,
                }
            )
        return {
            "kb_version": kb.version,
            "api_count": len(kb.apis),
            "sc_count": kb.sc_count(),
            "learned_sc_count": kb.learned_sc_count(),
            "gazetteers": {t: len(g.values) for t, g in kb.gazetteers.items()},
            "apis": apis,
        }

    def save(self, path: str | Path | None = None) -> Path:
        target = Path(path) if path else self.kb_path
        if target is None:
            raise EngineError("no KB path configured for saving")
        with self._lock:
            data = save_kb(self._kb)
            self.dirty = False
        target.write_bytes(data)
        logger.info("saved KB (version %d) to %s", self.kb.version, target)
        return target

    # -- sessions -----------------------------------------------------------

    def create_session(self) -> str:
        with self._lock:
            state = start_session(self._kb.version)
            self._sessions[state.session_id] = state
            return state.session_id

    def session(self, session_id: str) -> SessionState:
        with self._lock:
            state = self._sessions.get(session_id)
            if state is None:
                raise KeyError(session_id)
            return state

    def close(self, session_id: str) -> None:
        with self._lock:
            self._sessions[session_id] = close_session(self.session(session_id))

    def transcript(self, session_id: str) -> tuple:
        return self.session(session_id).transcript

    def submit_text(self, session_id: str, text: str) -> TurnOutcome:
        """Run one user turn; commit any learning; dispatch executes."""
        with self._lock:
            state = self.session(session_id)
            before = len(state.transcript)
            new_state, action, episode = handle_turn(state, text, self._kb, self.config)
            learned = False
            if action.kind is ActionKind.EXECUTE:
                if episode is not None:
                    try:
                        self._kb = commit_learning(self._kb, episode)
                        learned = True
                    except DegenerateTemplate:
                        # nothing to templatize; still count the usage
                        self._kb = record_usage(self._kb, episode.context_api, action.api_id)
                else:
                    self._kb = record_usage(
                        self._kb, state.last_executed_api, action.api_id
                    )
                self.dirty = True
            self._sessions[session_id] = new_state
            outcome = TurnOutcome(
                session_id=session_id,
                action=action,
                learned=learned,
                kb_version=self._kb.version,
                new_records=new_state.transcript[before:],
            )
        if action.kind is ActionKind.EXECUTE:
            self.executor(action.api_id, action.args)
        return outcome
