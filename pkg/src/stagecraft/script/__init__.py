"""Drama-script data model, plot-chain operations, and bounded diffing."""

from .diff import (
    AmbiguousDiffError,
    BoundViolation,
    CompletionChange,
    ModifiedPlot,
    PlotChainDiff,
    ReflectionOutcome,
    apply_diff,
    diff_chains,
    enforce_reflection_bound,
)
from .model import (
    CharacterProfile,
    DramaScript,
    Plot,
    PlotChain,
    PlotOrigin,
    Scene,
    SceneMode,
    SchemaError,
    UnknownPlotError,
    is_scene_complete,
    mark_complete,
    validate_script,
)
from .storage import (
    SCHEMA_ID,
    ScriptSyntaxError,
    parse_script,
    script_from_json,
    script_to_json,
    serialize_script,
)

__all__ = [
    "AmbiguousDiffError",
    "BoundViolation",
    "CharacterProfile",
    "CompletionChange",
    "DramaScript",
    "ModifiedPlot",
    "Plot",
    "PlotChain",
    "PlotChainDiff",
    "PlotOrigin",
    "ReflectionOutcome",
    "SCHEMA_ID",
    "Scene",
    "SceneMode",
    "SchemaError",
    "ScriptSyntaxError",
    "UnknownPlotError",
    "apply_diff",
    "diff_chains",
    "enforce_reflection_bound",
    "is_scene_complete",
    "mark_complete",
    "parse_script",
    "script_from_json",
    "script_to_json",
    "serialize_script",
    "validate_script",
]
