"""Reading and writing drama scripts as `stagecraft-script/v1` JSON."""

from __future__ import annotations

import json
from typing import Any

from .model import (
    CharacterProfile,
    DramaScript,
    Plot,
    PlotChain,
    PlotOrigin,
    Scene,
    SceneMode,
    SchemaError,
    validate_script,
)

SCHEMA_ID = "stagecraft-script/v1"


class ScriptSyntaxError(ValueError):
    """Malformed document (not valid JSON), with line/column position."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})" if line else message)
        self.line = line
        self.column = column


def _expect(mapping: dict, key: str, kind: type, where: str) -> Any:
    if key not in mapping:
        raise SchemaError(f"{where}: missing field {key!r}")
    value = mapping[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise SchemaError(f"{where}: field {key!r} must be {kind.__name__}")
    return value


def _plot_from_json(raw: dict, where: str) -> Plot:
    plot_id = _expect(raw, "id", str, where)
    description = _expect(raw, "description", str, where)
    owner = raw.get("owner")
    if owner is not None and not isinstance(owner, str):
        raise SchemaError(f"{where}: field 'owner' must be str")
    completed = raw.get("completed", False)
    if not isinstance(completed, bool):
        raise SchemaError(f"{where}: field 'completed' must be bool")
    origin = raw.get("origin", "scripted")
    try:
        origin = PlotOrigin(origin)
    except ValueError:
        raise SchemaError(f"{where}: unknown plot origin {origin!r}") from None
    return Plot(id=plot_id, description=description, completed=completed,
                owner=owner, origin=origin)


def script_from_json(data: dict, generated: bool = False) -> DramaScript:
    """Build and validate a DramaScript from decoded JSON."""
    if not isinstance(data, dict):
        raise SchemaError("script document must be a JSON object")
    declared = data.get("schema", SCHEMA_ID)
    if declared != SCHEMA_ID:
        raise SchemaError(f"unsupported schema {declared!r}, expected {SCHEMA_ID!r}")

    roster = []
    for i, raw in enumerate(_expect(data, "roster", list, "script")):
        where = f"roster[{i}]"
        if not isinstance(raw, dict):
            raise SchemaError(f"{where}: must be an object")
        roster.append(CharacterProfile(
            name=_expect(raw, "name", str, where),
            description=_expect(raw, "description", str, where),
            is_player=bool(raw.get("is_player", False)),
        ))

    scenes = []
    for i, raw in enumerate(_expect(data, "scenes", list, "script")):
        where = f"scenes[{i}]"
        if not isinstance(raw, dict):
            raise SchemaError(f"{where}: must be an object")
        mode_raw = raw.get("mode", "interactive")
        try:
            mode = SceneMode(mode_raw)
        except ValueError:
            raise SchemaError(f"{where}: unknown scene mode {mode_raw!r}") from None
        setups = raw.get("setups", {})
        if not isinstance(setups, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in setups.items()
        ):
            raise SchemaError(f"{where}: 'setups' must map character names to text")
        plots = tuple(
            _plot_from_json(p, f"{where}.plots[{j}]")
            for j, p in enumerate(_expect(raw, "plots", list, where))
        )
        scenes.append(Scene(
            index=_expect(raw, "index", int, where),
            background=_expect(raw, "background", str, where),
            location=_expect(raw, "location", str, where),
            setups=dict(setups),
            plot_chain=PlotChain(plots),
            mode=mode,
            is_flashback=bool(raw.get("is_flashback", False)),
        ))

    script = DramaScript(
        title=_expect(data, "title", str, "script"),
        background=_expect(data, "background", str, "script"),
        roster=tuple(roster),
        scenes=tuple(scenes),
    )
    return validate_script(script, generated=generated)


def parse_script(document: str, generated: bool = False) -> DramaScript:
    """Parse a UTF-8 `stagecraft-script/v1` document into a validated script.

    Raises ScriptSyntaxError for malformed JSON (with position) and
    SchemaError for structurally valid JSON that violates the schema.
    """
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ScriptSyntaxError(exc.msg, exc.lineno, exc.colno) from exc
    return script_from_json(data, generated=generated)


def script_to_json(script: DramaScript) -> dict:
    return {
        "schema": SCHEMA_ID,
        "title": script.title,
        "background": script.background,
        "roster": [
            {"name": c.name, "description": c.description, "is_player": c.is_player}
            for c in script.roster
        ],
        "scenes": [
            {
                "index": s.index,
                "background": s.background,
                "location": s.location,
                "mode": s.mode.value,
                "is_flashback": s.is_flashback,
                "setups": dict(s.setups),
                "plots": [plot_to_json(p) for p in s.plot_chain],
            }
            for s in script.scenes
        ],
    }


def plot_to_json(plot: Plot) -> dict:
    out: dict[str, Any] = {"id": plot.id, "description": plot.description}
    if plot.owner is not None:
        out["owner"] = plot.owner
    if plot.completed:
        out["completed"] = True
    if plot.origin is not PlotOrigin.SCRIPTED:
        out["origin"] = plot.origin.value
    return out


def serialize_script(script: DramaScript) -> str:
    return json.dumps(script_to_json(script), indent=2, ensure_ascii=False) + "\n"
