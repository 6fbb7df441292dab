"""Closed-form inference-count accounting.

Per turn the one-for-all architecture costs one call and director-actor
costs two; each reflection point adds one call, with floor(turns / k)
reflection points per scene.  Live session ledgers must match these
predictions exactly (the count-ratio between architectures is reported in
place of wall-clock speedups, which depend on hardware and are not
reproduced here).
"""

from __future__ import annotations

from typing import Optional, Sequence, Union

from ..script import SceneMode
from .types import Architecture, ArchitectureConfig, Session, resolve_architecture

TURN_COST = {
    Architecture.ONE_FOR_ALL: 1,
    Architecture.DIRECTOR_ACTOR: 2,
}


def _resolve(architecture: Architecture, mode: Optional[Union[str, SceneMode]]) -> Architecture:
    if architecture is not Architecture.HYBRID:
        return architecture
    if mode is None:
        raise ValueError("hybrid prediction needs per-scene modes")
    mode = SceneMode(mode)
    return (
        Architecture.ONE_FOR_ALL if mode is SceneMode.NARRATIVE else Architecture.DIRECTOR_ACTOR
    )


def inference_count(
    architecture: Union[Architecture, str],
    turns_per_scene: Sequence[int],
    k: Optional[int] = 5,
    scene_modes: Optional[Sequence[Union[str, SceneMode]]] = None,
) -> int:
    """Predicted total provider calls for a session shape.

    ``k`` is the reflection period; ``None`` disables reflection entirely
    (the "k = infinity" ablation).  ``scene_modes`` resolves hybrid dispatch
    and must align with ``turns_per_scene``.
    """
    architecture = Architecture(architecture)
    if scene_modes is not None and len(scene_modes) != len(turns_per_scene):
        raise ValueError("scene_modes must align with turns_per_scene")

    total = 0
    for position, turns in enumerate(turns_per_scene):
        if turns < 0:
            raise ValueError("turn counts must be >= 0")
        mode = scene_modes[position] if scene_modes is not None else None
        resolved = _resolve(architecture, mode)
        total += turns * TURN_COST[resolved]
        if k is not None:
            total += turns // k
    return total


def predicted_session_calls(session: Session) -> int:
    """Closed-form prediction for a live session's realized turn counts,
    used to cross-check its ledger."""
    turns = []
    modes = []
    for scene in session.script.scenes:
        played = session.turns_by_scene.get(scene.index, 0)
        if played:
            turns.append(played)
            modes.append(scene.mode)
    return inference_count(
        session.config.kind, turns, session.config.reflection_period, modes
    )


def architecture_for_scene(config: ArchitectureConfig, scene) -> Architecture:
    return resolve_architecture(config, scene)
