"""Prompt assembly for the live session agents.

The actor prompt is the one with a hard information-hiding contract: it
carries the character profile, the scene setup for that character, the
director's motivation, memories, and the observation -- never the script's
plot chain or any other scene's content.
"""

from __future__ import annotations

from ..gateway import InputClass, ReplyStrategy
from ..script import PlotChain, Scene
from .types import BROADCAST, MemoryEntry, Motivation, Observation, Session

DECISION_FORMAT = """\
## Output Format
Reply with exactly these lines:
COMPLETED: [<ids of plots that this turn newly completes, or empty>]
CLASS: InPlot | Daily | Breaking
STRATEGY: Avoid | IgnoreQuestion | Associate   (only when CLASS is not InPlot)
SPEAKER: <character name>
TO: <character name, player, or all>
SAY: <the utterance>
ACTION: <optional stage action>
"""

ACTOR_FORMAT = """\
## Output Format
Reply with exactly these lines:
COMPLETED: []
SPEAKER: <your character name>
TO: <character name, player, or all>
SAY: <the utterance>
ACTION: <optional stage action>
"""

DIRECTOR_FORMAT = """\
## Output Format
Reply with exactly these lines:
COMPLETED: [<ids of plots that this turn newly completes, or empty>]
CLASS: InPlot | Daily | Breaking
STRATEGY: Avoid | IgnoreQuestion | Associate   (only when CLASS is not InPlot)
TARGET: <the character who should respond>
MOTIVATION: <what that character should try to do this turn>
"""

REFLECTION_FORMAT = """\
## Output Format
Reply with NOCHANGE, or with at most one of:
ADJUST: <plot id> := <full replacement description>
INSERT: <position in the chain, 0-based> := <new plot description>
Never touch completed plots, never remove plots, never change more than \
the single adjustment or insertion allowed.
"""

STRATEGY_GUIDE = {
    ReplyStrategy.AVOID: (
        "Avoid: brush off the irrelevance of what the player said and "
        "redirect the conversation back on track."
    ),
    ReplyStrategy.IGNORE_QUESTION: (
        "IgnoreQuestion: do not answer the player's question; instead turn "
        "the table and ask the player a question that serves the story."
    ),
    ReplyStrategy.ASSOCIATE: (
        "Associate: pick up some entity or imagery from the player's words "
        "and connect it to something relevant to the story."
    ),
}

CLASS_GUIDE = """\
Classify the player input first:
- InPlot: the input aligns with the ongoing plot.
- Daily: the input is outside the plot but fits the story world.
- Breaking: the input would break the storytelling (irrelevant, nonsensical, \
provocative, or offensive).
For Daily or Breaking inputs, guide the player back to the plot using one \
replying strategy:
- Avoid: brush the irrelevance off and redirect the conversation back on track.
- IgnoreQuestion: answer nothing; turn the table and ask the player a question.
- Associate: connect an entity or image from the player's words back to the plot.
"""


def render_chain(chain: PlotChain) -> str:
    lines = []
    for plot in chain:
        box = "x" if plot.completed else " "
        owner = f" (owner: {plot.owner})" if plot.owner else ""
        lines.append(f"- [{box}] {plot.id}: {plot.description}{owner}")
    return "\n".join(lines)


def render_memory(entries: list[MemoryEntry], window: int | None = None) -> str:
    if window is not None:
        entries = entries[-window:]
    if not entries:
        return "(no dialogue yet)"
    lines = []
    for entry in entries:
        target = "" if entry.addressee == BROADCAST else f" (to {entry.addressee})"
        utterance = entry.utterance if entry.utterance.strip() else "(silence)"
        lines.append(f"[turn {entry.turn}] {entry.speaker}{target}: {utterance}")
    return "\n".join(lines)


def render_observation(observation: Observation) -> str:
    return (
        f"Scene {observation.scene_index}, location: {observation.location}. "
        f"Present: {', '.join(observation.present_characters)}."
    )


def render_player_input(text: str) -> str:
    return text if text.strip() else "(silence)"


def _scene_block(session: Session) -> str:
    scene: Scene = session.scene
    setups = "\n".join(f"- {name}: {text}" for name, text in scene.setups.items())
    return (
        f"## Scene {scene.index}: {scene.location}\n"
        f"{scene.background}\n\n"
        f"## Character Setups\n{setups if setups else '(none)'}"
    )


def _roster_block(session: Session) -> str:
    player = session.script.player().name
    lines = []
    for profile in session.script.roster:
        marker = " (the player)" if profile.is_player else ""
        lines.append(f"- {profile.name}{marker}: {profile.description}")
    return "## Characters\n" + "\n".join(lines) + f"\n\nThe player plays {player}."


def one_for_all_prompt(session: Session, player_input: str,
                       preset_class: InputClass | None = None) -> str:
    """Global-agent prompt: full script visibility, one inference both
    updates the plot chain and produces the next utterance."""
    parts = [
        "## Task",
        "You play every character of this interactive drama at once. Follow the "
        "plot chain, decide which plots the latest exchange completes, pick the "
        "character who should speak next, and produce their reply to the player.",
        f"\n## Drama: {session.script.title}\n{session.script.background}",
        "\n" + _roster_block(session),
        "\n" + _scene_block(session),
        f"\n## Plot Chain\n{render_chain(session.chain)}",
        f"\n## Observation\n{render_observation(session.observation())}",
        f"\n## Memory\n{render_memory(session.memory_window())}",
        f"\n## Player Input\n{render_player_input(player_input)}",
        "\n## Replying Strategies\n" + CLASS_GUIDE,
    ]
    if preset_class is not None:
        parts.append(
            f"\nThe player input class has already been determined: {preset_class.value}."
        )
    parts.append("\n" + DECISION_FORMAT)
    return "\n".join(parts)


def director_prompt(session: Session, player_input: str,
                    preset_class: InputClass | None = None) -> str:
    parts = [
        "## Task",
        "You direct this interactive drama. Follow the plot chain, decide which "
        "plots the latest exchange completes, then pick the character who should "
        "respond and give them a motivation for this turn. The chosen actor never "
        "sees the script, so the motivation must carry everything they need.",
        f"\n## Drama: {session.script.title}\n{session.script.background}",
        "\n" + _roster_block(session),
        "\n" + _scene_block(session),
        f"\n## Plot Chain\n{render_chain(session.chain)}",
        f"\n## Observation\n{render_observation(session.observation())}",
        f"\n## Memory\n{render_memory(session.memory_window())}",
        f"\n## Player Input\n{render_player_input(player_input)}",
        "\n## Replying Strategies\n" + CLASS_GUIDE,
    ]
    if preset_class is not None:
        parts.append(
            f"\nThe player input class has already been determined: {preset_class.value}."
        )
    parts.append("\n" + DIRECTOR_FORMAT)
    return "\n".join(parts)


def actor_prompt(session: Session, player_input: str, motivation: Motivation,
                 strategy: ReplyStrategy | None = None) -> str:
    """Script-blind actor prompt: profile + scene setup + motivation only."""
    profile = session.script.character(motivation.target_actor)
    setup = session.scene.setups.get(profile.name, "")
    parts = [
        "## Task",
        f"You play {profile.name} in a live interactive drama. Stay in character "
        "and reply to the latest player input, guided by your motivation for this turn.",
        f"\n## Your Character\n{profile.name}: {profile.description}",
    ]
    if setup:
        parts.append(f"\n## Your Current Thoughts\n{setup}")
    parts += [
        f"\n## Your Motivation This Turn\n{motivation.instruction}",
        f"\n## Observation\n{render_observation(session.observation())}",
        f"\n## Memory\n{render_memory(session.memory_window())}",
        f"\n## Player Input\n{render_player_input(player_input)}",
    ]
    if strategy is not None:
        parts.append(f"\n## Replying Strategy\nUse this strategy: {STRATEGY_GUIDE[strategy]}")
    parts.append("\n" + ACTOR_FORMAT)
    return "\n".join(parts)


def reflection_prompt(session: Session, player_input: str) -> str:
    parts = [
        "## Task",
        "Reflect on the plot chain of the current scene. Analyze the player's "
        "behavior in the dialogue so far (emotion, intention) and, if the story "
        "would benefit, adapt the incomplete plots to it: adjust at most one "
        "incomplete plot, or insert at most one new plot.",
        f"\n## Drama: {session.script.title}\n{session.script.background}",
        "\n" + _scene_block(session),
        f"\n## Plot Chain\n{render_chain(session.chain)}",
        f"\n## Memory\n{render_memory(session.memory_window())}",
        f"\n## Player Input\n{render_player_input(player_input)}",
        "\n" + REFLECTION_FORMAT,
    ]
    return "\n".join(parts)


def classifier_prompt(session: Session, player_input: str) -> str:
    parts = [
        "## Task",
        "Classify the player input against the ongoing drama.",
        "\n" + _scene_block(session),
        f"\n## Plot Chain\n{render_chain(session.chain)}",
        f"\n## Memory\n{render_memory(session.memory_window())}",
        f"\n## Player Input\n{render_player_input(player_input)}",
        "\n## Classes\n" + CLASS_GUIDE,
        "\n## Output Format\nReply with exactly one line:\nCLASS: InPlot | Daily | Breaking",
    ]
    return "\n".join(parts)


def repair_prompt(problem: str, previous: str) -> str:
    return (
        f"Your previous reply could not be used: {problem}\n\n"
        f"Reply again, following the required output format exactly. Previous reply:\n"
        f"{previous}"
    )
