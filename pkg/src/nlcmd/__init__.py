"""nlcmd: a self-learning natural-language command interface engine.

Grounds user commands against seed-command templates with typed slots,
treats grounding failure as novelty, clarifies through a budgeted dialogue,
and permanently learns new templates and slot values during use.
"""

from .characterize import Characterization, characterize, render_description
from .config import EngineConfig, load_config
from .dialogue import (
    ActionKind,
    AgentAction,
    OptionItem,
    Phase,
    SessionState,
    close_session,
    handle_turn,
    risk_gate,
    start_session,
)
from .grounding import (
    Binding,
    BoundValue,
    GroundingCandidate,
    GroundingResult,
    Utterance,
    enumerate_bindings,
    ground,
    score_candidate,
)
from .harness import CorpusItem, EvalReport, SimulatedUser, load_corpus, run_corpus
from .kb import (
    START,
    ApiSpec,
    ArgSpec,
    KnowledgeBase,
    Provenance,
    SeedCommand,
    TypeGazetteer,
    add_gazetteer_value,
    add_seed_command,
    load_kb,
    record_usage,
    save_kb,
)
from .learning import (
    LearnEpisode,
    ResolvedArg,
    commit_learning,
    episodes_from_cluster,
    induce_seed_command,
    register_api,
)
from .novelty import (
    Bucket,
    NoveltyReport,
    SurpriseReport,
    cluster_novel_commands,
    confidence_bucket,
    contextual_surprise,
    novelty_score,
)
from .runtime import EngineRuntime
from .scdsl import parse_spec
from .textnorm import normalize

__version__ = "0.1.0"

__all__ = [
    "ActionKind",
    "AgentAction",
    "ApiSpec",
    "ArgSpec",
    "Binding",
    "BoundValue",
    "Bucket",
    "Characterization",
    "CorpusItem",
    "EngineConfig",
    "EngineRuntime",
    "EvalReport",
    "GroundingCandidate",
    "GroundingResult",
    "KnowledgeBase",
    "LearnEpisode",
    "NoveltyReport",
    "OptionItem",
    "Phase",
    "Provenance",
    "ResolvedArg",
    "START",
    "SeedCommand",
    "SessionState",
    "SimulatedUser",
    "SurpriseReport",
    "TypeGazetteer",
    "Utterance",
    "add_gazetteer_value",
    "add_seed_command",
    "characterize",
    "close_session",
    "cluster_novel_commands",
    "commit_learning",
    "confidence_bucket",
    "contextual_surprise",
    "enumerate_bindings",
    "episodes_from_cluster",
    "ground",
    "handle_turn",
    "induce_seed_command",
    "load_config",
    "load_corpus",
    "load_kb",
    "normalize",
    "novelty_score",
    "parse_spec",
    "record_usage",
    "register_api",
    "render_description",
    "risk_gate",
    "run_corpus",
    "save_kb",
    "score_candidate",
    "start_session",
]
