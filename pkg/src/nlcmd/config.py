"""Engine configuration: thresholds, budgets, and hooks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable

from .errors import ConfigError, InvalidThresholds

#: Keys accepted in a config file.
_FILE_KEYS = {
    "theta_exec",
    "gamma",
    "tau",
    "min_support",
    "delta",
    "question_budget",
    "rephrase_budget",
    "top_k",
    "autosave_interval",
}


@dataclass
class EngineConfig:
    """Tunable knobs; defaults reproduce the stock clarification behavior."""

    theta_exec: float = 0.8  # execute when best score >= theta_exec
    gamma: float = 0.65  # novel when aggregate novelty >= gamma
    tau: float = 0.05  # surprise probability threshold
    min_support: int = 20  # min context observations before surprise fires
    delta: float = 0.6  # cluster-join similarity threshold
    question_budget: int = 4  # max questions per command
    rephrase_budget: int = 2  # max rephrase requests per command
    top_k: int = 3  # option list size
    autosave_interval: float | None = None  # seconds; None disables
    # Hook deciding whether a novel command is worth pursuing. Everything is
    # relevant by default; a host application may narrow this.
    relevance: Callable | None = field(default=None, repr=False, compare=False)

    def validate(self) -> "EngineConfig":
        if not (0.0 <= 1.0 - self.theta_exec < self.gamma <= 1.0):
            raise InvalidThresholds(
                f"need 0 <= 1 - theta_exec < gamma <= 1 "
                f"(theta_exec={self.theta_exec}, gamma={self.gamma})"
            )
        if self.question_budget < 1 or self.rephrase_budget < 0 or self.top_k < 1:
            raise ConfigError("budgets must be positive (rephrase_budget may be 0)")
        if not (0.0 < self.tau < 1.0) or self.min_support < 0:
            raise ConfigError("tau must be in (0, 1) and min_support >= 0")
        if not (0.0 < self.delta <= 1.0):
            raise ConfigError("delta must be in (0, 1]")
        return self

    def is_relevant(self, utterance, report) -> bool:
        if self.relevance is None:
            return True
        return bool(self.relevance(utterance, report))

    def to_dict(self) -> dict:
        return {
            name: getattr(self, name)
            for name in (f.name for f in fields(self))
            if name in _FILE_KEYS
        }


def config_from_dict(doc: dict) -> EngineConfig:
    unknown = set(doc) - _FILE_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return EngineConfig(**doc).validate()


def load_config(path: str | Path) -> EngineConfig:
    """Read a JSON config file; unknown keys are rejected."""
    try:
        doc = json.loads(Path(path).read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    return config_from_dict(doc)
