"""The live drama turn engine.

``step`` runs one player turn end to end: periodic bounded reflection,
architecture dispatch (one global call, or director then actor), plot-chain
update before the utterance is committed, memory append, and scene
transition.  All state changes are staged and committed atomically through
``Session.apply_record``; a failed turn leaves the session untouched and
replayable.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Callable, Optional

from ..gateway import (
    CREATIVE_TEMPERATURE,
    JUDGE_TEMPERATURE,
    ChatMessage,
    ChatRequest,
    DecisionFields,
    DirectorFields,
    GatewayError,
    InputClass,
    MalformedDecisionError,
    Provider,
    ReplyStrategy,
    chat_request,
    extract_director_fields,
    extract_structured_decision,
    parse_keyed_lines,
    require_strategy_coherence,
)
from ..script import (
    DramaScript,
    Plot,
    PlotChain,
    PlotOrigin,
    ReflectionOutcome,
    enforce_reflection_bound,
    is_scene_complete,
    mark_complete,
)
from . import prompts
from .types import (
    Architecture,
    Decision,
    Motivation,
    ReflectionRecord,
    SceneHeader,
    Session,
    SessionStatus,
    TurnRecord,
    scene_header,
)

logger = logging.getLogger(__name__)


class SessionFinishedError(Exception):
    """The session already played its final scene."""


class TurnFailedError(Exception):
    """The turn could not be completed; session state is unchanged and the
    same input may be replayed."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"turn failed at {stage}: {cause}")
        self.stage = stage
        self.cause = cause


# ---------------------------------------------------------------------------
# structured calls with a single repair retry

def _structured_call(
    provider: Provider,
    role: str,
    prompt: str,
    parse,
    temperature: float,
):
    """Issue one call; on a malformed reply, retry once with a repair
    conversation, then give up.  Returns (parsed, repair_calls)."""
    exchange = provider.complete(chat_request("", prompt, temperature=temperature, role=role))
    try:
        return parse(exchange.response), 0
    except MalformedDecisionError as exc:
        repair = prompts.repair_prompt(str(exc), exchange.response)
        request = ChatRequest(
            messages=(
                ChatMessage("user", prompt),
                ChatMessage("assistant", exchange.response or "(empty)"),
                ChatMessage("user", repair),
            ),
            temperature=temperature,
            role=role,
        )
        retry = provider.complete(request)
        return parse(retry.response), 1


# ---------------------------------------------------------------------------
# input classification

def classify_input(player_input: str, session: Session, provider: Provider) -> InputClass:
    """Classify a player input.  Empty or whitespace input is Breaking by
    local rule, without any LLM call; otherwise one classifier call."""
    if not player_input.strip():
        return InputClass.BREAKING
    exchange = provider.complete(chat_request(
        "", prompts.classifier_prompt(session, player_input),
        temperature=JUDGE_TEMPERATURE, role="classifier",
    ))
    fields = parse_keyed_lines(exchange.response)
    raw = fields.get("CLASS", "")
    try:
        return InputClass(raw)
    except ValueError:
        raise MalformedDecisionError(f"classifier must answer CLASS: InPlot | Daily | Breaking, got {raw!r}") from None


# ---------------------------------------------------------------------------
# reflection

_REFLECTION_LINE = re.compile(r"^(ADJUST|INSERT):\s*(.+?)\s*:=\s*(.+\S)\s*$")


def _fresh_reflected_id(chain_ids: set[str], used: set[str]) -> str:
    number = 1
    for plot_id in chain_ids | used:
        match = re.fullmatch(r"r(\d+)", plot_id)
        if match:
            number = max(number, int(match.group(1)) + 1)
    return f"r{number}"


def parse_reflection_proposal(
    response: str, chain: PlotChain
) -> tuple[Optional[PlotChain], list[str]]:
    """Build the proposed chain from a reflection reply.

    The reply is either ``NOCHANGE`` or ``ADJUST``/``INSERT`` lines keyed by
    plot id; inserted plots get fresh ids with a reflected origin.  Returns
    (proposal, errors); an unusable reply yields (None, errors).
    """
    adjusts: list[tuple[str, str]] = []
    inserts: list[tuple[int, str]] = []
    recognized = False
    for line in response.replace("\r\n", "\n").split("\n"):
        line = line.strip()
        if not line:
            continue
        if line == "NOCHANGE":
            recognized = True
            continue
        match = _REFLECTION_LINE.match(line)
        if not match:
            continue
        recognized = True
        kind, key, text = match.groups()
        if kind == "ADJUST":
            adjusts.append((key, text))
        else:
            try:
                inserts.append((int(key), text))
            except ValueError:
                return None, [f"malformed: INSERT position {key!r} is not an integer"]

    if not recognized:
        return None, ["malformed: reply contains no NOCHANGE, ADJUST, or INSERT line"]

    errors = []
    for plot_id, _ in adjusts:
        if not chain.has(plot_id):
            errors.append(f"unknown-plot: {plot_id}")
    if errors:
        return None, errors

    plots: list[Plot] = []
    replacement = dict(adjusts)
    for plot in chain:
        if plot.id in replacement:
            plots.append(Plot(
                id=plot.id,
                description=replacement[plot.id],
                completed=plot.completed,
                owner=plot.owner,
                origin=plot.origin,
            ))
        else:
            plots.append(plot)

    used: set[str] = set()
    chain_ids = set(chain.ids())
    for position, text in inserts:
        new_id = _fresh_reflected_id(chain_ids, used)
        used.add(new_id)
        plots.insert(min(max(position, 0), len(plots)),
                     Plot(id=new_id, description=text, origin=PlotOrigin.REFLECTED))
    return PlotChain(tuple(plots)), []


_LINT_STOPWORDS = frozenset("""
the and with that this from have has had will they them their there where when
what who whom your you for are was were been being about into over under after
before while then than some something someone here his her she him its also
very just not but can could would should shall may might must does did doing
each every both all any more most other another such only own same too again
against between through during without within along across behind beyond
""".split())


def _lint_tokens(text: str) -> set[str]:
    return {
        token for token in re.findall(r"[a-zA-Z']{4,}", text.lower())
        if token not in _LINT_STOPWORDS
    }


def lint_chain_changes(
    script: DramaScript, current_scene_index: int, changed_texts: list[str]
) -> tuple[str, ...]:
    """Flag reflected plot text that mentions entities the script never
    names, or that only future scenes name.  Advisory: never blocks."""
    global_words = _lint_tokens(script.title) | _lint_tokens(script.background)
    for profile in script.roster:
        global_words |= _lint_tokens(profile.name) | _lint_tokens(profile.description)

    scene_words: dict[str, set[int]] = {}
    for scene in script.scenes:
        text = " ".join(
            [scene.background, scene.location]
            + list(scene.setups.values())
            + list(scene.setups.keys())
            + [p.description for p in scene.plot_chain]
        )
        for token in _lint_tokens(text):
            scene_words.setdefault(token, set()).add(scene.index)

    flags: list[str] = []
    for text in changed_texts:
        for token in sorted(_lint_tokens(text)):
            if token in global_words:
                continue
            scenes_with = scene_words.get(token)
            if scenes_with is None:
                flags.append(f"unknown-entity: {token!r} appears nowhere in the script")
            elif all(index > current_scene_index for index in scenes_with):
                flags.append(
                    f"future-scene: {token!r} first appears in scene "
                    f"{min(scenes_with)}, after the current scene"
                )
    return tuple(dict.fromkeys(flags))


def _run_reflection(
    session: Session, player_input: str, turn: int, provider: Provider
) -> ReflectionRecord:
    chain = session.chain
    base = dict(turn=turn, scene_index=session.scene.index)
    try:
        exchange = provider.complete(chat_request(
            "", prompts.reflection_prompt(session, player_input),
            temperature=JUDGE_TEMPERATURE, role="reflection",
        ))
    except GatewayError as exc:
        logger.warning("reflection skipped this period: %s", exc)
        return ReflectionRecord(accepted=False, error=str(exc), **base)

    proposal, errors = parse_reflection_proposal(exchange.response, chain)
    if proposal is None:
        logger.warning("reflection proposal unusable: %s", errors)
        return ReflectionRecord(accepted=False, violations=tuple(errors), **base)

    outcome: ReflectionOutcome = enforce_reflection_bound(
        chain, proposal, budget=session.config.reflection_budget
    )
    modified = tuple(
        (m.plot_id, m.old_description, m.new_description) for m in outcome.diff.modified
    )
    inserted = tuple((pos, p.id, p.description) for pos, p in outcome.diff.inserted)

    if not outcome.accepted:
        codes = tuple(f"{v.code}: {v.plot_id or ''}".rstrip(": ") for v in outcome.violations)
        logger.info("reflection rejected at turn %d: %s", turn, codes)
        return ReflectionRecord(
            accepted=False, violations=codes, modified=modified, inserted=inserted, **base
        )

    changed_texts = [new for (_, _, new) in modified] + [desc for (_, _, desc) in inserted]
    lint = lint_chain_changes(session.script, session.scene.index, changed_texts)
    if lint:
        logger.warning("reflection lint flags at turn %d: %s", turn, lint)
    return ReflectionRecord(
        accepted=True,
        modified=modified,
        inserted=inserted,
        accepted_plots=outcome.chain.plots,
        lint_flags=lint,
        **base,
    )


def reflect(session: Session, provider: Provider, player_input: str = "") -> ReflectionRecord:
    """Run one reflection for the turn currently being processed.

    Due only every ``reflection_period`` turns of the scene; the engine calls
    this from ``step`` at the right moments, and standalone callers get the
    same precondition check.  The accepted chain (if any) rides on the
    returned record; committing it is ``step``'s job.
    """
    k = session.config.reflection_period
    if k is None:
        raise ValueError("reflection is disabled for this session (period is None)")
    turn = session.scene_turn + 1
    if turn % k != 0:
        raise ValueError(f"reflection is not due at scene turn {turn} (period {k})")
    return _run_reflection(session, player_input, session.turn + 1, provider)


# ---------------------------------------------------------------------------
# decision steps

def _split_completions(
    chain: PlotChain, asserted: tuple[str, ...]
) -> tuple[tuple[str, ...], tuple[str, ...], list[str]]:
    """Partition asserted completions into applied and dropped; duplicate and
    already-complete assertions are ignored, unknown ids are dropped with a
    warning.  Completion is monotone: nothing ever reverts."""
    applied: list[str] = []
    dropped: list[str] = []
    warnings: list[str] = []
    for plot_id in asserted:
        if plot_id in applied:
            continue
        if not chain.has(plot_id):
            dropped.append(plot_id)
            warnings.append(f"dropped completion assertion for unknown plot {plot_id!r}")
            continue
        if chain.get(plot_id).completed:
            continue
        applied.append(plot_id)
    return tuple(applied), tuple(dropped), warnings


def _coerce_strategy(
    input_class: InputClass, strategy: Optional[ReplyStrategy], warnings: list[str]
) -> Optional[ReplyStrategy]:
    """In-plot turns carry no strategy: drop a spurious one with a warning.
    The missing-strategy case is validated repairably at parse time."""
    if input_class is InputClass.IN_PLOT and strategy is not None:
        warnings.append(f"dropped strategy {strategy.value} on an InPlot turn")
        return None
    return strategy


def _npc_names(session: Session) -> set[str]:
    player = session.script.player().name
    return {name for name in session.present_characters() if name != player}


def decide_one_for_all(
    session: Session, player_input: str, provider: Provider,
    preset_class: Optional[InputClass] = None,
) -> tuple[DecisionFields, int]:
    """One global-agent call that updates the plot chain and produces the
    next utterance within the same inference."""

    def parse(response: str) -> DecisionFields:
        fields = extract_structured_decision(response)
        if fields.speaker not in _npc_names(session):
            raise MalformedDecisionError(
                f"SPEAKER must be a character present in the scene, got {fields.speaker!r}"
            )
        require_strategy_coherence(preset_class or fields.input_class, fields.strategy)
        return fields

    prompt = prompts.one_for_all_prompt(session, player_input, preset_class)
    fields, repairs = _structured_call(
        provider, "global", prompt, parse, CREATIVE_TEMPERATURE
    )
    return fields, repairs


def direct(
    session: Session, player_input: str, provider: Provider,
    preset_class: Optional[InputClass] = None,
) -> tuple[DirectorFields, int]:
    """Director call: plot-completion assertions plus the chosen actor and
    its motivation for this turn."""

    def parse(response: str) -> DirectorFields:
        fields = extract_director_fields(response)
        if fields.target not in _npc_names(session):
            raise MalformedDecisionError(
                f"TARGET must be a character present in the scene, got {fields.target!r}"
            )
        require_strategy_coherence(preset_class or fields.input_class, fields.strategy)
        return fields

    prompt = prompts.director_prompt(session, player_input, preset_class)
    fields, repairs = _structured_call(
        provider, "director", prompt, parse, JUDGE_TEMPERATURE
    )
    return fields, repairs


def act(
    session: Session, player_input: str, motivation: Motivation, provider: Provider,
    strategy: Optional[ReplyStrategy] = None,
) -> tuple[DecisionFields, int, list[str]]:
    """Script-blind actor call: the prompt carries profile, setup, and
    motivation -- never the plot chain.  Actor completion assertions carry
    no authority and are discarded."""
    warnings: list[str] = []

    def parse(response: str) -> DecisionFields:
        fields = extract_structured_decision(response)
        if fields.speaker != motivation.target_actor:
            raise MalformedDecisionError(
                f"SPEAKER must be {motivation.target_actor!r}, got {fields.speaker!r}"
            )
        return fields

    prompt = prompts.actor_prompt(session, player_input, motivation, strategy)
    fields, repairs = _structured_call(provider, "actor", prompt, parse, CREATIVE_TEMPERATURE)
    if fields.completed:
        warnings.append(
            f"actor asserted completions {list(fields.completed)}; actors have no "
            f"authority over the plot chain, dropped"
        )
    return fields, repairs, warnings


# ---------------------------------------------------------------------------
# the step pipeline

@dataclass(frozen=True)
class StepResult:
    decision: Decision
    turn: int
    scene_index: int
    reflection: Optional[ReflectionRecord] = None
    transition: Optional[SceneHeader] = None
    finished: bool = False
    warnings: tuple[str, ...] = ()
    record: TurnRecord = None  # type: ignore[assignment]


def step(session: Session, player_input: str, provider: Provider) -> StepResult:
    """Run one full turn for a player input and commit it.

    Pipeline: reflection when due, architecture dispatch, plot-chain update
    (before the utterance is committed to memory), memory append, scene
    transition when the chain completes.  Raises SessionFinishedError after
    the final scene and TurnFailedError (state unchanged) when the model
    cannot produce a usable decision.
    """
    if session.status is SessionStatus.FINISHED:
        raise SessionFinishedError("the drama has finished; no further turns")

    turn = session.turn + 1
    scene_turn = session.scene_turn + 1
    scene = session.scene
    arch = session.architecture()
    ledger = {role: 0 for role in ("director", "actor", "global", "reflection")}
    warnings: list[str] = []
    repair_calls = 0

    k = session.config.reflection_period
    reflection: Optional[ReflectionRecord] = None
    if k is not None and scene_turn % k == 0:
        reflection = _run_reflection(session, player_input, turn, provider)
        ledger["reflection"] += 1

    # Everything below works on a staged chain; session.chain tracks it only
    # so prompts assembled mid-turn see the working state, and is always
    # restored before the atomic commit via apply_record.
    original_chain = session.chain
    working_chain = session.chain
    if reflection is not None and reflection.accepted:
        assert reflection.accepted_plots is not None
        working_chain = PlotChain(reflection.accepted_plots)

    preset_class = InputClass.BREAKING if not player_input.strip() else None

    try:
        session.chain = working_chain
        motivation: Optional[Motivation] = None
        if arch is Architecture.ONE_FOR_ALL:
            fields, repairs = decide_one_for_all(session, player_input, provider, preset_class)
            repair_calls += repairs
            ledger["global"] += 1
            input_class = preset_class or fields.input_class
            strategy = _coerce_strategy(input_class, fields.strategy, warnings)
            asserted = fields.completed
            speaker, to = fields.speaker, fields.to
            say, action = fields.say, fields.action
            applied, dropped, completion_warnings = _split_completions(working_chain, asserted)
            for plot_id in applied:
                working_chain = mark_complete(working_chain, plot_id)
        else:
            dfields, repairs = direct(session, player_input, provider, preset_class)
            repair_calls += repairs
            ledger["director"] += 1
            input_class = preset_class or dfields.input_class
            strategy = _coerce_strategy(input_class, dfields.strategy, warnings)
            asserted = dfields.completed
            motivation = Motivation(
                target_actor=dfields.target, instruction=dfields.motivation, turn=turn
            )
            # the plot-chain update precedes the utterance: the director's
            # assertions take effect before the actor speaks
            applied, dropped, completion_warnings = _split_completions(working_chain, asserted)
            for plot_id in applied:
                working_chain = mark_complete(working_chain, plot_id)
            session.chain = working_chain
            afields, repairs, actor_warnings = act(
                session, player_input, motivation, provider, strategy
            )
            repair_calls += repairs
            ledger["actor"] += 1
            warnings.extend(actor_warnings)
            speaker, to = afields.speaker, afields.to
            say, action = afields.say, afields.action
        warnings.extend(completion_warnings)

        decision = Decision(
            speaker=speaker,
            addressee=to,
            utterance=say,
            action=action,
            asserted_completions=asserted,
            input_class=input_class,
            strategy=strategy,
        )
    except (GatewayError, ValueError) as exc:
        stage = "decision" if arch is Architecture.ONE_FOR_ALL else "director/actor"
        raise TurnFailedError(stage, exc) from exc
    finally:
        session.chain = original_chain

    transition: Optional[SceneHeader] = None
    finished = False
    if is_scene_complete(working_chain):
        if session.scene_pos + 1 >= len(session.script.scenes):
            finished = True
        else:
            transition = scene_header(session.script.scenes[session.scene_pos + 1])

    record = TurnRecord(
        turn=turn,
        scene_index=scene.index,
        architecture=arch,
        player_input=player_input,
        decision=decision,
        applied_completions=applied,
        dropped_completions=dropped,
        motivation=motivation,
        reflection=reflection,
        transition=transition,
        finished=finished,
        ledger_delta=ledger,
        repair_calls=repair_calls,
        warnings=tuple(warnings),
    )
    session.apply_record(record)
    return StepResult(
        decision=decision,
        turn=turn,
        scene_index=scene.index,
        reflection=reflection,
        transition=transition,
        finished=finished,
        warnings=tuple(warnings),
        record=record,
    )
