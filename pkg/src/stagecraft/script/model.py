"""Drama-script data model: characters, plots, plot chains, scenes, scripts.

Everything here is an immutable value type.  Mutation happens by building a
new value (e.g. ``mark_complete`` returns a fresh chain), which keeps session
replay and diffing trivially correct.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Optional


class SceneMode(str, Enum):
    NARRATIVE = "narrative"
    INTERACTIVE = "interactive"


class PlotOrigin(str, Enum):
    SCRIPTED = "scripted"
    REFLECTED = "reflected"


class SchemaError(ValueError):
    """A structurally well-formed document that violates the script schema."""


class UnknownPlotError(KeyError):
    """Referenced plot id does not exist in the chain."""

    def __init__(self, plot_id: str):
        super().__init__(plot_id)
        self.plot_id = plot_id

    def __str__(self) -> str:
        return f"unknown plot id: {self.plot_id!r}"


@dataclass(frozen=True)
class CharacterProfile:
    name: str
    description: str
    is_player: bool = False


@dataclass(frozen=True)
class Plot:
    """One objective in a scene's plot chain."""

    id: str
    description: str
    completed: bool = False
    owner: Optional[str] = None
    origin: PlotOrigin = PlotOrigin.SCRIPTED


@dataclass(frozen=True)
class PlotChain:
    plots: tuple[Plot, ...] = ()

    def __iter__(self) -> Iterator[Plot]:
        return iter(self.plots)

    def __len__(self) -> int:
        return len(self.plots)

    def ids(self) -> list[str]:
        return [p.id for p in self.plots]

    def get(self, plot_id: str) -> Plot:
        for p in self.plots:
            if p.id == plot_id:
                return p
        raise UnknownPlotError(plot_id)

    def has(self, plot_id: str) -> bool:
        return any(p.id == plot_id for p in self.plots)


def mark_complete(chain: PlotChain, plot_id: str) -> PlotChain:
    """Return a chain identical to ``chain`` except the target plot is
    completed.  Idempotent; raises UnknownPlotError for missing ids.
    """
    if not chain.has(plot_id):
        raise UnknownPlotError(plot_id)
    return PlotChain(tuple(
        replace(p, completed=True) if p.id == plot_id else p for p in chain
    ))


def is_scene_complete(chain: PlotChain) -> bool:
    """True iff every plot is completed.  An empty chain is vacuously
    complete (generation never produces one; validation rejects them).
    """
    return all(p.completed for p in chain)


@dataclass(frozen=True)
class Scene:
    index: int
    background: str
    location: str
    setups: dict[str, str] = field(default_factory=dict)
    plot_chain: PlotChain = field(default_factory=PlotChain)
    mode: SceneMode = SceneMode.INTERACTIVE
    is_flashback: bool = False


@dataclass(frozen=True)
class DramaScript:
    title: str
    background: str
    roster: tuple[CharacterProfile, ...]
    scenes: tuple[Scene, ...]

    def player(self) -> CharacterProfile:
        for c in self.roster:
            if c.is_player:
                return c
        raise SchemaError("script has no player role")

    def character(self, name: str) -> CharacterProfile:
        for c in self.roster:
            if c.name == name:
                return c
        raise SchemaError(f"unknown character: {name!r}")

    def roster_names(self) -> set[str]:
        return {c.name for c in self.roster}


def validate_script(script: DramaScript, generated: bool = False) -> DramaScript:
    """Check every script invariant; returns the script or raises SchemaError.

    ``generated`` applies the stricter 3-5 scene window required of
    pipeline-produced scripts; hand-written scripts only need one scene.
    """
    names = [c.name for c in script.roster]
    if len(names) != len(set(names)):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise SchemaError(f"duplicate roster names: {dupes}")
    players = [c.name for c in script.roster if c.is_player]
    if len(players) == 0:
        raise SchemaError("script must mark exactly one roster entry as the player (none found)")
    if len(players) > 1:
        raise SchemaError(f"script must mark exactly one player role, found {len(players)}: {players}")

    if generated:
        if not 3 <= len(script.scenes) <= 5:
            raise SchemaError(f"generated scripts need 3-5 scenes, got {len(script.scenes)}")
    elif len(script.scenes) < 1:
        raise SchemaError("script needs at least one scene")

    roster = script.roster_names()
    seen_index = set()
    for scene in script.scenes:
        if scene.index in seen_index:
            raise SchemaError(f"duplicate scene index {scene.index}")
        seen_index.add(scene.index)
        for who in scene.setups:
            if who not in roster:
                raise SchemaError(
                    f"scene {scene.index} setup names {who!r}, who is not in the roster"
                )
        if len(scene.plot_chain) == 0:
            raise SchemaError(f"scene {scene.index} has an empty plot chain")
        ids = scene.plot_chain.ids()
        if len(ids) != len(set(ids)):
            raise SchemaError(f"scene {scene.index} has duplicate plot ids")
        for plot in scene.plot_chain:
            if not plot.description.strip():
                raise SchemaError(f"scene {scene.index} plot {plot.id!r} has an empty description")
            if plot.owner is not None and plot.owner not in roster:
                raise SchemaError(
                    f"scene {scene.index} plot {plot.id!r} owner {plot.owner!r} is not in the roster"
                )
    return script
