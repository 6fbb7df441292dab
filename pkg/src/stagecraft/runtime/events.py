"""JSON (de)serialization of turn records, for the append-only session log.

A session is exactly reproducible from its script plus its record stream;
these converters are the contract between the engine and the service's
event store.
"""

from __future__ import annotations

from typing import Any, Optional

from ..gateway import InputClass, ReplyStrategy
from ..script import Plot, PlotOrigin
from .types import (
    Architecture,
    Decision,
    Motivation,
    ReflectionRecord,
    SceneHeader,
    TurnRecord,
)


def decision_to_json(decision: Decision) -> dict:
    return {
        "speaker": decision.speaker,
        "addressee": decision.addressee,
        "utterance": decision.utterance,
        "action": decision.action,
        "asserted_completions": list(decision.asserted_completions),
        "input_class": decision.input_class.value,
        "strategy": decision.strategy.value if decision.strategy else None,
    }


def decision_from_json(data: dict) -> Decision:
    return Decision(
        speaker=data["speaker"],
        addressee=data["addressee"],
        utterance=data["utterance"],
        action=data.get("action"),
        asserted_completions=tuple(data.get("asserted_completions", [])),
        input_class=InputClass(data["input_class"]),
        strategy=ReplyStrategy(data["strategy"]) if data.get("strategy") else None,
    )


def _plot_to_json(plot: Plot) -> dict:
    return {
        "id": plot.id,
        "description": plot.description,
        "completed": plot.completed,
        "owner": plot.owner,
        "origin": plot.origin.value,
    }


def _plot_from_json(data: dict) -> Plot:
    return Plot(
        id=data["id"],
        description=data["description"],
        completed=data.get("completed", False),
        owner=data.get("owner"),
        origin=PlotOrigin(data.get("origin", "scripted")),
    )


def reflection_to_json(record: ReflectionRecord) -> dict:
    return {
        "turn": record.turn,
        "scene_index": record.scene_index,
        "accepted": record.accepted,
        "violations": list(record.violations),
        "modified": [list(m) for m in record.modified],
        "inserted": [list(i) for i in record.inserted],
        "accepted_plots": (
            None if record.accepted_plots is None
            else [_plot_to_json(p) for p in record.accepted_plots]
        ),
        "lint_flags": list(record.lint_flags),
        "error": record.error,
    }


def reflection_from_json(data: dict) -> ReflectionRecord:
    plots = data.get("accepted_plots")
    return ReflectionRecord(
        turn=data["turn"],
        scene_index=data["scene_index"],
        accepted=data["accepted"],
        violations=tuple(data.get("violations", [])),
        modified=tuple(tuple(m) for m in data.get("modified", [])),
        inserted=tuple(tuple(i) for i in data.get("inserted", [])),
        accepted_plots=None if plots is None else tuple(_plot_from_json(p) for p in plots),
        lint_flags=tuple(data.get("lint_flags", [])),
        error=data.get("error", ""),
    )


def header_to_json(header: Optional[SceneHeader]) -> Optional[dict]:
    if header is None:
        return None
    return {
        "index": header.index,
        "location": header.location,
        "background": header.background,
        "mode": header.mode,
        "is_flashback": header.is_flashback,
    }


def header_from_json(data: Optional[dict]) -> Optional[SceneHeader]:
    if data is None:
        return None
    return SceneHeader(
        index=data["index"],
        location=data["location"],
        background=data["background"],
        mode=data["mode"],
        is_flashback=data.get("is_flashback", False),
    )


def record_to_json(record: TurnRecord) -> dict:
    out: dict[str, Any] = {
        "turn": record.turn,
        "scene_index": record.scene_index,
        "architecture": record.architecture.value,
        "player_input": record.player_input,
        "decision": decision_to_json(record.decision),
        "applied_completions": list(record.applied_completions),
        "dropped_completions": list(record.dropped_completions),
        "motivation": (
            None if record.motivation is None else {
                "target_actor": record.motivation.target_actor,
                "instruction": record.motivation.instruction,
                "turn": record.motivation.turn,
            }
        ),
        "reflection": (
            None if record.reflection is None else reflection_to_json(record.reflection)
        ),
        "transition": header_to_json(record.transition),
        "finished": record.finished,
        "ledger_delta": dict(record.ledger_delta),
        "repair_calls": record.repair_calls,
        "warnings": list(record.warnings),
    }
    return out


def record_from_json(data: dict) -> TurnRecord:
    motivation = data.get("motivation")
    reflection = data.get("reflection")
    return TurnRecord(
        turn=data["turn"],
        scene_index=data["scene_index"],
        architecture=Architecture(data["architecture"]),
        player_input=data["player_input"],
        decision=decision_from_json(data["decision"]),
        applied_completions=tuple(data.get("applied_completions", [])),
        dropped_completions=tuple(data.get("dropped_completions", [])),
        motivation=(
            None if motivation is None else Motivation(
                target_actor=motivation["target_actor"],
                instruction=motivation["instruction"],
                turn=motivation["turn"],
            )
        ),
        reflection=None if reflection is None else reflection_from_json(reflection),
        transition=header_from_json(data.get("transition")),
        finished=data.get("finished", False),
        ledger_delta=dict(data.get("ledger_delta", {})),
        repair_calls=data.get("repair_calls", 0),
        warnings=tuple(data.get("warnings", [])),
    )
