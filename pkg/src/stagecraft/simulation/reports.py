"""Automated playthroughs and architecture comparisons.

These produce objective, countable reports (completion, pacing, call
counts, strategy usage, reflection outcomes); subjective quality scoring is
out of scope by design.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from ..gateway import GatewayError, InputClass, Provider, chat_request
from ..runtime import (
    Architecture,
    ArchitectureConfig,
    Session,
    SessionStatus,
    TurnFailedError,
    TurnRecord,
    predicted_session_calls,
    record_to_json,
    step,
)
from ..runtime.prompts import render_memory
from ..script import DramaScript
from .personas import PlayerPersona
from .stubs import WalkthroughPolicy, drama_stub, player_stub

DEFAULT_MAX_TURNS = 60


@dataclass
class SimReport:
    script_title: str
    persona: str
    architecture: str
    reflection_period: Optional[int]
    finished: bool = False
    turns: int = 0
    per_scene_completion: dict[int, tuple[int, int]] = field(default_factory=dict)
    ledger: dict[str, int] = field(default_factory=dict)
    ledger_total: int = 0
    predicted_calls: int = 0
    repair_calls: int = 0
    strategy_histogram: dict[str, dict[str, int]] = field(default_factory=dict)
    reflections_accepted: int = 0
    reflections_rejected: int = 0
    reflections_skipped: int = 0
    lint_flags: list[str] = field(default_factory=list)
    aborted: str = ""  # provider failure note; report is partial

    def completion_ratio(self) -> float:
        done = sum(c for c, _ in self.per_scene_completion.values())
        total = sum(t for _, t in self.per_scene_completion.values())
        return done / total if total else 0.0

    def to_json(self) -> dict:
        return {
            "script_title": self.script_title,
            "persona": self.persona,
            "architecture": self.architecture,
            "reflection_period": self.reflection_period,
            "finished": self.finished,
            "turns": self.turns,
            "per_scene_completion": {
                str(index): {"completed": done, "total": total}
                for index, (done, total) in sorted(self.per_scene_completion.items())
            },
            "completion_ratio": self.completion_ratio(),
            "ledger": dict(self.ledger),
            "ledger_total": self.ledger_total,
            "predicted_calls": self.predicted_calls,
            "repair_calls": self.repair_calls,
            "strategy_histogram": {
                cls: dict(hist) for cls, hist in self.strategy_histogram.items()
            },
            "reflections": {
                "accepted": self.reflections_accepted,
                "rejected": self.reflections_rejected,
                "skipped": self.reflections_skipped,
            },
            "lint_flags": list(self.lint_flags),
            "aborted": self.aborted,
        }


def _scene_completion(session: Session) -> dict[int, tuple[int, int]]:
    out: dict[int, tuple[int, int]] = {}
    for pos, scene in enumerate(session.script.scenes):
        total = len(scene.plot_chain)
        if pos < session.scene_pos or (
            pos == session.scene_pos and session.status is SessionStatus.FINISHED
        ):
            out[scene.index] = (total, total)
        elif pos == session.scene_pos:
            out[scene.index] = (sum(1 for p in session.chain if p.completed), total)
        else:
            out[scene.index] = (0, total)
    return out


def _player_turn(session: Session, persona: PlayerPersona, player_provider: Provider) -> str:
    transcript = render_memory(session.memory_window())
    scene = session.scene
    prompt = (
        f"You are playing {session.script.player().name} in the interactive drama "
        f"\"{session.script.title}\".\n\n"
        f"Current scene ({scene.index}): {scene.location}. {scene.background}\n\n"
        f"## Dialogue So Far\n{transcript}\n\n"
        f"Reply with only your next line as the player."
    )
    exchange = player_provider.complete(
        chat_request(persona.description, prompt, role="player")
    )
    return exchange.response.strip()


def run_playthrough(
    script: DramaScript,
    persona: PlayerPersona,
    config: ArchitectureConfig,
    max_turns: int,
    provider_pair: tuple[Provider, Provider],
    transcript_path: Optional[Path] = None,
) -> tuple[SimReport, list[TurnRecord]]:
    """Alternate player-agent inputs and engine steps until the drama
    finishes or the cutoff hits.  Provider errors abort with a partial
    report rather than raising."""
    if max_turns <= 0:
        raise ValueError("max_turns must be > 0")
    drama_provider, player_provider = provider_pair

    session = Session(script=script, config=config)
    report = SimReport(
        script_title=script.title,
        persona=persona.name,
        architecture=config.kind.value,
        reflection_period=config.reflection_period,
    )

    while session.status is not SessionStatus.FINISHED and session.turn < max_turns:
        try:
            player_input = _player_turn(session, persona, player_provider)
            result = step(session, player_input, drama_provider)
        except (GatewayError, TurnFailedError) as exc:
            report.aborted = str(exc)
            break

        decision = result.decision
        if decision.input_class is not InputClass.IN_PLOT:
            hist = report.strategy_histogram.setdefault(decision.input_class.value, {})
            name = decision.strategy.value if decision.strategy else "?"
            hist[name] = hist.get(name, 0) + 1
        if result.reflection is not None:
            if result.reflection.error:
                report.reflections_skipped += 1
            elif result.reflection.accepted:
                report.reflections_accepted += 1
            else:
                report.reflections_rejected += 1
            report.lint_flags.extend(result.reflection.lint_flags)

    report.finished = session.status is SessionStatus.FINISHED
    report.turns = session.turn
    report.per_scene_completion = _scene_completion(session)
    report.ledger = dict(session.ledger)
    report.ledger_total = session.ledger_total()
    report.predicted_calls = predicted_session_calls(session)
    report.repair_calls = session.repair_calls

    if transcript_path is not None:
        with open(transcript_path, "w", encoding="utf-8") as handle:
            for record in session.records:
                handle.write(json.dumps(record_to_json(record), ensure_ascii=False) + "\n")

    return report, list(session.records)


COMPARE_ROWS: tuple[tuple[str, Architecture, bool], ...] = (
    ("director-actor", Architecture.DIRECTOR_ACTOR, True),
    ("hybrid", Architecture.HYBRID, True),
    ("hybrid-no-reflection", Architecture.HYBRID, False),
)


@dataclass
class ComparisonRow:
    label: str
    reports: list[SimReport] = field(default_factory=list)

    def total_calls(self) -> int:
        return sum(r.ledger_total for r in self.reports)

    def total_predicted(self) -> int:
        return sum(r.predicted_calls for r in self.reports)

    def mean_turns(self) -> float:
        return sum(r.turns for r in self.reports) / len(self.reports) if self.reports else 0.0

    def mean_completion(self) -> float:
        if not self.reports:
            return 0.0
        return sum(r.completion_ratio() for r in self.reports) / len(self.reports)

    def reflection_counts(self) -> tuple[int, int]:
        return (
            sum(r.reflections_accepted for r in self.reports),
            sum(r.reflections_rejected for r in self.reports),
        )


@dataclass
class ComparisonTable:
    rows: list[ComparisonRow]

    def to_json(self) -> dict:
        baseline = next((r for r in self.rows if r.label == "director-actor"), self.rows[0])
        base_calls = baseline.total_calls()
        out = []
        for row in self.rows:
            accepted, rejected = row.reflection_counts()
            calls = row.total_calls()
            out.append({
                "architecture": row.label,
                "playthroughs": len(row.reports),
                "mean_turns": row.mean_turns(),
                "mean_completion": row.mean_completion(),
                "total_calls": calls,
                "predicted_calls": row.total_predicted(),
                "count_speedup_vs_director_actor": (base_calls / calls) if calls else 0.0,
                "reflections_accepted": accepted,
                "reflections_rejected": rejected,
            })
        return {"rows": out}


def compare_architectures(
    script: DramaScript,
    personas: list[PlayerPersona],
    drama_factory: Optional[Callable[[], Provider]] = None,
    player_factory: Optional[Callable[[PlayerPersona], Provider]] = None,
    max_turns: int = DEFAULT_MAX_TURNS,
    reflection_period: Optional[int] = 5,
    policy: Optional[WalkthroughPolicy] = None,
) -> ComparisonTable:
    """Run every persona through the three architecture rows with identical
    (freshly built) providers per run, so differences between rows are
    attributable to architecture alone.  The no-reflection row is the same
    code path with the period disabled, never a separate implementation."""
    if not personas:
        raise ValueError("compare_architectures needs at least one persona")
    drama_factory = drama_factory or (lambda: drama_stub(policy))
    player_factory = player_factory or player_stub

    rows = []
    for label, kind, with_reflection in COMPARE_ROWS:
        row = ComparisonRow(label=label)
        config = ArchitectureConfig(
            kind=kind,
            reflection_period=reflection_period if with_reflection else None,
        )
        for persona in personas:
            report, _records = run_playthrough(
                script, persona, config, max_turns,
                (drama_factory(), player_factory(persona)),
            )
            row.reports.append(report)
        rows.append(row)
    return ComparisonTable(rows=rows)
