"""Live-session state: memory, decisions, architecture config, and the
event records the engine commits after every turn.

A `Session` is only ever mutated through `apply_record`, so a session can be
reconstructed exactly by replaying its records (no LLM involved): records
carry the semantic facts (accepted reflection chains, applied completions)
rather than references to provider traffic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from ..gateway import InputClass, ReplyStrategy
from ..script import (
    DramaScript,
    Plot,
    PlotChain,
    Scene,
    SceneMode,
    is_scene_complete,
    mark_complete,
)

DEFAULT_REFLECTION_PERIOD = 5
DEFAULT_REFLECTION_BUDGET = 1

LEDGER_ROLES = ("director", "actor", "global", "reflection")


class Architecture(str, Enum):
    DIRECTOR_ACTOR = "director-actor"
    ONE_FOR_ALL = "one-for-all"
    HYBRID = "hybrid"


class SessionStatus(str, Enum):
    ACTIVE = "active"
    SCENE_TRANSITION = "scene_transition"
    FINISHED = "finished"


@dataclass(frozen=True)
class ArchitectureConfig:
    kind: Architecture = Architecture.HYBRID
    reflection_period: Optional[int] = DEFAULT_REFLECTION_PERIOD  # None disables reflection
    reflection_budget: int = DEFAULT_REFLECTION_BUDGET
    memory_window: Optional[int] = None  # None = flatten all memories into prompts

    def __post_init__(self):
        if self.reflection_period is not None and self.reflection_period < 1:
            raise ValueError("reflection_period must be >= 1 (or None to disable)")
        if self.reflection_budget < 1:
            raise ValueError("reflection_budget must be >= 1")


def resolve_architecture(config: ArchitectureConfig, scene: Scene) -> Architecture:
    """Per-scene dispatch: hybrid plays narrative scenes one-for-all and
    interactive scenes director-actor."""
    if config.kind is Architecture.HYBRID:
        if scene.mode is SceneMode.NARRATIVE:
            return Architecture.ONE_FOR_ALL
        return Architecture.DIRECTOR_ACTOR
    return config.kind


PLAYER_SPEAKER = "player"
BROADCAST = "all"


@dataclass(frozen=True)
class MemoryEntry:
    turn: int
    speaker: str  # character name, or "player"
    addressee: str  # character name, "player", or "all"
    utterance: str
    scene_index: int


@dataclass(frozen=True)
class Observation:
    """Scene snapshot handed to every agent prompt: where we are, who is
    present, and how much memory the prompt window includes."""

    scene_index: int
    location: str
    present_characters: tuple[str, ...]
    last_n_entries: Optional[int] = None  # None = all


@dataclass(frozen=True)
class Motivation:
    target_actor: str
    instruction: str
    turn: int


@dataclass(frozen=True)
class Decision:
    speaker: str
    addressee: str
    utterance: str
    action: Optional[str] = None
    asserted_completions: tuple[str, ...] = ()
    input_class: InputClass = InputClass.IN_PLOT
    strategy: Optional[ReplyStrategy] = None

    def __post_init__(self):
        in_plot = self.input_class is InputClass.IN_PLOT
        if in_plot and self.strategy is not None:
            raise ValueError("in-plot decisions carry no replying strategy")
        if not in_plot and self.strategy is None:
            raise ValueError(f"{self.input_class.value} decisions require a replying strategy")


@dataclass(frozen=True)
class ReflectionRecord:
    """Outcome of one reflection period, with enough detail to replay it
    and to render a diff view."""

    turn: int
    scene_index: int
    accepted: bool
    violations: tuple[str, ...] = ()  # violation codes
    modified: tuple[tuple[str, str, str], ...] = ()  # (plot id, old desc, new desc)
    inserted: tuple[tuple[int, str, str], ...] = ()  # (position, plot id, description)
    accepted_plots: Optional[tuple[Plot, ...]] = None  # full chain when accepted
    lint_flags: tuple[str, ...] = ()
    error: str = ""  # provider failure note; reflection skipped


@dataclass(frozen=True)
class SceneHeader:
    index: int
    location: str
    background: str
    mode: str
    is_flashback: bool = False


def scene_header(scene: Scene) -> SceneHeader:
    return SceneHeader(
        index=scene.index,
        location=scene.location,
        background=scene.background,
        mode=scene.mode.value,
        is_flashback=scene.is_flashback,
    )


@dataclass(frozen=True)
class TurnRecord:
    """The committed facts of one turn; the unit of session replay."""

    turn: int
    scene_index: int
    architecture: Architecture
    player_input: str
    decision: Decision
    applied_completions: tuple[str, ...] = ()
    dropped_completions: tuple[str, ...] = ()
    motivation: Optional[Motivation] = None
    reflection: Optional[ReflectionRecord] = None
    transition: Optional[SceneHeader] = None  # header of the scene entered
    finished: bool = False
    ledger_delta: dict[str, int] = field(default_factory=dict)
    repair_calls: int = 0
    warnings: tuple[str, ...] = ()


@dataclass
class Session:
    """One live playthrough.

    The inference ledger counts logical calls by role (the quantities the
    closed-form count law predicts); repair retries are tracked separately
    in `repair_calls` and raw attempts live in the provider's exchange log.
    """

    script: DramaScript
    config: ArchitectureConfig = field(default_factory=ArchitectureConfig)
    session_id: str = ""
    scene_pos: int = 0  # 0-based position into script.scenes
    turn: int = 0
    scene_turn: int = 0  # committed turns within the current scene
    chain: PlotChain = field(default_factory=PlotChain)
    memory: list[MemoryEntry] = field(default_factory=list)
    ledger: dict[str, int] = field(default_factory=lambda: {r: 0 for r in LEDGER_ROLES})
    repair_calls: int = 0
    status: SessionStatus = SessionStatus.ACTIVE
    records: list[TurnRecord] = field(default_factory=list)
    turns_by_scene: dict[int, int] = field(default_factory=dict)  # scene index -> turns played

    def __post_init__(self):
        if len(self.chain) == 0 and self.script.scenes:
            self.chain = self.script.scenes[0].plot_chain

    @property
    def scene(self) -> Scene:
        return self.script.scenes[self.scene_pos]

    def architecture(self) -> Architecture:
        return resolve_architecture(self.config, self.scene)

    def ledger_total(self) -> int:
        return sum(self.ledger.values())

    def memory_window(self) -> list[MemoryEntry]:
        if self.config.memory_window is None:
            return list(self.memory)
        return self.memory[-self.config.memory_window:]

    def present_characters(self) -> tuple[str, ...]:
        player = self.script.player().name
        present = [player]
        present += [name for name in self.scene.setups if name != player]
        return tuple(present)

    def observation(self) -> Observation:
        return Observation(
            scene_index=self.scene.index,
            location=self.scene.location,
            present_characters=self.present_characters(),
            last_n_entries=self.config.memory_window,
        )

    def reflections(self) -> list[ReflectionRecord]:
        return [r.reflection for r in self.records if r.reflection is not None]

    def apply_record(self, record: TurnRecord) -> None:
        """Commit one turn's facts.  This is the only mutation path, shared
        by the live engine and by replay-from-log."""
        if self.status is SessionStatus.FINISHED:
            raise ValueError("session is finished")
        if record.turn != self.turn + 1:
            raise ValueError(f"record turn {record.turn} does not follow turn {self.turn}")

        if record.reflection is not None and record.reflection.accepted:
            assert record.reflection.accepted_plots is not None
            self.chain = PlotChain(record.reflection.accepted_plots)

        for plot_id in record.applied_completions:
            self.chain = mark_complete(self.chain, plot_id)

        self.memory.append(MemoryEntry(
            turn=record.turn,
            speaker=PLAYER_SPEAKER,
            addressee=BROADCAST,
            utterance=record.player_input,
            scene_index=record.scene_index,
        ))
        self.memory.append(MemoryEntry(
            turn=record.turn,
            speaker=record.decision.speaker,
            addressee=record.decision.addressee,
            utterance=record.decision.utterance,
            scene_index=record.scene_index,
        ))

        for role, count in record.ledger_delta.items():
            self.ledger[role] = self.ledger.get(role, 0) + count
        self.repair_calls += record.repair_calls

        self.turn = record.turn
        self.scene_turn += 1
        self.turns_by_scene[record.scene_index] = self.turns_by_scene.get(record.scene_index, 0) + 1
        self.records.append(record)

        if record.finished:
            self.status = SessionStatus.FINISHED
        elif record.transition is not None:
            for pos, scene in enumerate(self.script.scenes):
                if scene.index == record.transition.index:
                    self.scene_pos = pos
                    break
            else:
                raise ValueError(f"transition to unknown scene index {record.transition.index}")
            self.chain = self.scene.plot_chain
            self.scene_turn = 0
            self.status = SessionStatus.SCENE_TRANSITION
        else:
            self.status = SessionStatus.ACTIVE

    def chain_is_complete(self) -> bool:
        return is_scene_complete(self.chain)
