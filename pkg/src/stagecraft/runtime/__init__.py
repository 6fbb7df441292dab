"""Live drama session engine: decision steps, bounded reflection,
architecture dispatch, memory, and scene transitions."""

from .engine import (
    SessionFinishedError,
    StepResult,
    TurnFailedError,
    act,
    classify_input,
    decide_one_for_all,
    direct,
    lint_chain_changes,
    parse_reflection_proposal,
    reflect,
    step,
)
from .events import (
    decision_from_json,
    decision_to_json,
    record_from_json,
    record_to_json,
    reflection_from_json,
    reflection_to_json,
)
from .ledger import inference_count, predicted_session_calls
from .types import (
    BROADCAST,
    DEFAULT_REFLECTION_BUDGET,
    DEFAULT_REFLECTION_PERIOD,
    LEDGER_ROLES,
    PLAYER_SPEAKER,
    Architecture,
    ArchitectureConfig,
    Decision,
    MemoryEntry,
    Motivation,
    Observation,
    ReflectionRecord,
    SceneHeader,
    Session,
    SessionStatus,
    TurnRecord,
    resolve_architecture,
    scene_header,
)

__all__ = [
    "Architecture",
    "ArchitectureConfig",
    "BROADCAST",
    "DEFAULT_REFLECTION_BUDGET",
    "DEFAULT_REFLECTION_PERIOD",
    "Decision",
    "LEDGER_ROLES",
    "MemoryEntry",
    "Motivation",
    "Observation",
    "PLAYER_SPEAKER",
    "ReflectionRecord",
    "SceneHeader",
    "Session",
    "SessionFinishedError",
    "SessionStatus",
    "StepResult",
    "TurnFailedError",
    "TurnRecord",
    "act",
    "classify_input",
    "decide_one_for_all",
    "decision_from_json",
    "decision_to_json",
    "direct",
    "inference_count",
    "lint_chain_changes",
    "parse_reflection_proposal",
    "predicted_session_calls",
    "record_from_json",
    "record_to_json",
    "reflect",
    "reflection_from_json",
    "reflection_to_json",
    "resolve_architecture",
    "scene_header",
    "step",
]
