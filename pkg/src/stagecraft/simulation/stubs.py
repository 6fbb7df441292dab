"""Deterministic offline stand-ins for the drama and player LLMs.

The drama stub reads the machine-readable blocks of each prompt (plot
chain, observation, player input) and walks the script at a configurable
pace; the player stub cycles persona-flavored inputs from a shared bank, so
the drama stub can classify them by lookup.  Everything is a pure function
of the prompt, which keeps whole playthroughs bit-deterministic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from ..gateway import ChatRequest, InputClass, MockProvider, ReplyStrategy
from .personas import PlayerPersona

# Shared bank of player inputs, keyed by class.  The drama stub classifies
# by exact lookup; anything unknown counts as Daily.
INPUT_BANK: dict[str, InputClass] = {
    "Tell me what you saw tonight.": InputClass.IN_PLOT,
    "Who do you think wrote it?": InputClass.IN_PLOT,
    "What were you doing during the storm?": InputClass.IN_PLOT,
    "Show me what you found.": InputClass.IN_PLOT,
    "What do you all think of the food up here?": InputClass.DAILY,
    "Do you come to the mountains often?": InputClass.DAILY,
    "Has anyone seen my gloves?": InputClass.DAILY,
    "What's your favorite season?": InputClass.DAILY,
    "This is all scripted nonsense, admit it.": InputClass.BREAKING,
    "Let's all just break character right now.": InputClass.BREAKING,
    "blorp blorp blorp": InputClass.BREAKING,
    "I demand you end the storm immediately.": InputClass.BREAKING,
}

_BY_CLASS: dict[InputClass, list[str]] = {}
for _text, _cls in INPUT_BANK.items():
    _BY_CLASS.setdefault(_cls, []).append(_text)

# How each persona mixes input classes, as a repeating pattern.
PERSONA_STYLES: dict[str, tuple[InputClass, ...]] = {
    "Grumpy Guy": (InputClass.BREAKING, InputClass.IN_PLOT, InputClass.DAILY),
    "Fan Girl": (InputClass.DAILY, InputClass.DAILY, InputClass.IN_PLOT),
    "Confused Man": (InputClass.DAILY, InputClass.IN_PLOT),
    "Strolling Lady": (InputClass.DAILY,),
    "Flamer": (InputClass.BREAKING, InputClass.DAILY),
    "Screenwriter": (InputClass.IN_PLOT,),
    "Heartbroken One": (InputClass.DAILY, InputClass.IN_PLOT, InputClass.IN_PLOT),
    "Troublemaker": (InputClass.BREAKING,),
    "Multilingual": (InputClass.DAILY, InputClass.BREAKING),
    "Demanding": (InputClass.BREAKING, InputClass.DAILY),
}


def classify_bank_input(text: str) -> InputClass:
    return INPUT_BANK.get(text, InputClass.DAILY)


def player_stub(persona: PlayerPersona) -> MockProvider:
    """A mock player agent: cycles through the persona's input pattern."""
    pattern = PERSONA_STYLES.get(persona.name, (InputClass.IN_PLOT,))
    state = {"turn": 0}

    def respond(request: ChatRequest) -> str:
        kind = pattern[state["turn"] % len(pattern)]
        bank = _BY_CLASS[kind]
        text = bank[state["turn"] % len(bank)]
        state["turn"] += 1
        return text

    return MockProvider(stub=respond)


_CHAIN_LINE = re.compile(r"^- \[( |x)\] (\S+): (.*?)(?: \(owner: (.+)\))?$")
_SCENE_LINE = re.compile(r"^Scene (\d+), location: .*?\. Present: (.*)\.$", re.M)
_PRESET_LINE = re.compile(r"input class has already been determined: (\w+)")


@dataclass
class PromptView:
    """What the drama stub reads out of an engine prompt."""

    scene_index: int = 0
    present: list[str] = field(default_factory=list)
    incomplete: list[tuple[str, Optional[str]]] = field(default_factory=list)  # (id, owner)
    descriptions: dict[str, str] = field(default_factory=dict)  # id -> description
    player_input: str = ""
    preset_class: Optional[InputClass] = None
    actor_name: str = ""  # actor prompts only


def parse_prompt(text: str) -> PromptView:
    view = PromptView()
    scene = _SCENE_LINE.search(text)
    if scene:
        view.scene_index = int(scene.group(1))
        view.present = [name.strip() for name in scene.group(2).split(",")]
    in_input = False
    for line in text.split("\n"):
        if line.startswith("## Player Input"):
            in_input = True
            continue
        if in_input:
            view.player_input = line.strip()
            in_input = False
        match = _CHAIN_LINE.match(line)
        if match:
            view.descriptions[match.group(2)] = match.group(3)
            if match.group(1) == " ":
                view.incomplete.append((match.group(2), match.group(4)))
    preset = _PRESET_LINE.search(text)
    if preset:
        view.preset_class = InputClass(preset.group(1))
    actor = re.search(r"^## Your Character\n(.+?):", text, re.M)
    if actor:
        view.actor_name = actor.group(1).strip()
    return view


_STRATEGIES = (ReplyStrategy.AVOID, ReplyStrategy.IGNORE_QUESTION, ReplyStrategy.ASSOCIATE)


@dataclass
class WalkthroughPolicy:
    """Completion pacing for the scripted drama stub.

    With ``target_turns_per_scene`` unset, every in-plot turn completes the
    next incomplete plot.  With a target, completions are deferred so the
    scene finishes on exactly that turn (assuming enough in-plot inputs).
    Off-plot turns never complete plots.
    """

    target_turns_per_scene: Optional[int] = None


class ScriptedDrama:
    """Programmable-mock brain that walks the plot chain deterministically.

    With ``adaptive`` set, the first reflection of each scene adjusts one
    incomplete plot (an accepted, visible diff); otherwise every reflection
    answers NOCHANGE.
    """

    def __init__(self, policy: WalkthroughPolicy | None = None, adaptive: bool = False):
        self.policy = policy or WalkthroughPolicy()
        self.adaptive = adaptive
        self._scene_turns: dict[int, int] = {}
        self._offplot_turns = 0
        self._reflected_scenes: set[int] = set()

    def provider(self) -> MockProvider:
        return MockProvider(stub=self)

    # the decision brain: one compact reply per role
    def __call__(self, request: ChatRequest) -> str:
        view = parse_prompt(request.last_user_content())
        role = request.role
        if role == "reflection":
            if (
                self.adaptive
                and view.incomplete
                and view.scene_index not in self._reflected_scenes
            ):
                self._reflected_scenes.add(view.scene_index)
                plot_id = view.incomplete[0][0]
                original = view.descriptions.get(plot_id, "The plot proceeds.")
                return f"ADJUST: {plot_id} := {original} The player's questions sharpen it."
            return "NOCHANGE"
        if role == "actor":
            turn = self._scene_turns.get(view.scene_index, 0)
            return (
                f"COMPLETED: []\n"
                f"SPEAKER: {view.actor_name}\n"
                f"TO: player\n"
                f"SAY: Let us keep to the matter at hand. (beat {turn})"
            )
        if role == "classifier":
            return f"CLASS: {classify_bank_input(view.player_input).value}"
        if role in ("global", "director"):
            return self._decide(view, role)
        raise AssertionError(f"scripted drama cannot answer role {role!r}")

    def _decide(self, view: PromptView, role: str) -> str:
        turn = self._scene_turns.get(view.scene_index, 0) + 1
        self._scene_turns[view.scene_index] = turn

        input_class = view.preset_class or classify_bank_input(view.player_input)
        strategy: Optional[ReplyStrategy] = None
        if input_class is not InputClass.IN_PLOT:
            strategy = _STRATEGIES[self._offplot_turns % len(_STRATEGIES)]
            self._offplot_turns += 1

        completed: list[str] = []
        if input_class is InputClass.IN_PLOT and view.incomplete:
            target = self.policy.target_turns_per_scene
            if target is None:
                completed = [view.incomplete[0][0]]
            else:
                remaining_turns = max(target - turn + 1, 1)
                if len(view.incomplete) >= remaining_turns:
                    completed = [view.incomplete[0][0]]

        npcs = view.present[1:] if len(view.present) > 1 else view.present
        speaker = npcs[0] if npcs else "Narrator"
        if completed:
            owner = view.incomplete[0][1]
            if owner and owner in npcs:
                speaker = owner

        lines = [f"COMPLETED: [{', '.join(completed)}]", f"CLASS: {input_class.value}"]
        if strategy is not None:
            lines.append(f"STRATEGY: {strategy.value}")
        if role == "global":
            lines += [
                f"SPEAKER: {speaker}",
                "TO: player",
                f"SAY: The night is long; let us see this through. (beat {turn})",
            ]
        else:
            lines += [
                f"TARGET: {speaker}",
                "MOTIVATION: Respond to the player in character and keep the scene moving.",
            ]
        return "\n".join(lines)


def drama_stub(policy: WalkthroughPolicy | None = None) -> MockProvider:
    return ScriptedDrama(policy).provider()


_SITUATION_LINE = re.compile(r"^Dramatic Situation:\n(.+?):$", re.M)
_TECHNIQUE_LINE = re.compile(r"^([A-Z][\w -]+): ", re.M)
_STORY_BLOCK = re.compile(r"^## Story\n(.*?)(?:\n## |\Z)", re.M | re.S)
_TAGGED_LINE = re.compile(r"^\[(s\d+|new)\] ", re.M)


class ScriptedAuthor:
    """Programmable-mock writer/critic/judge/refiner/transformer.

    Produces bland but structurally perfect responses derived only from the
    prompt, so the full premise-to-playable-script loop runs offline and
    deterministically.
    """

    STORY_BEATS = (
        "The evening opens quietly, with everyone pretending the road ahead is safe.",
        "A stranger's remark lands wrong, and the first crack shows.",
        "An object out of place hints that somebody is lying.",
        "The protagonist starts asking questions nobody wants to answer.",
        "A confidence is traded in a corridor, half warning and half plea.",
        "The rival interests collide in the open at last.",
        "What looked like the truth folds inside out.",
        "The protagonist chooses, and the cost of the choice is named.",
    )

    def provider(self) -> MockProvider:
        return MockProvider(stub=self)

    def __call__(self, request: ChatRequest) -> str:
        prompt = request.last_user_content()
        role = request.role
        if role == "writer":
            return self._write(prompt)
        if role == "critic":
            return self._critique(prompt)
        if role == "reviser":
            return self._revise(prompt)
        if role == "judge":
            return "BEST: 1\nRATIONALE: The first telling holds its structure best."
        if role == "refiner":
            return self._refine(prompt)
        if role == "transformer":
            return self._transform(prompt)
        raise AssertionError(f"scripted author cannot answer role {role!r}")

    def _situation(self, prompt: str) -> str:
        match = _SITUATION_LINE.search(prompt)
        return match.group(1) if match else "Drama"

    def _write(self, prompt: str) -> str:
        situation = self._situation(prompt)
        beats = " ".join(self.STORY_BEATS)
        return (
            f"### Plot Outline\nA {situation.lower()} arc in three movements: a guarded "
            f"opening, a collision of hidden agendas, and a costly resolution.\n"
            f"### Complete Story\n{beats}\n"
            f"### Technique Explanation\nThe chosen techniques shape the opening mismatch, "
            f"the reversal, and the closing image."
        )

    def _story_block(self, prompt: str) -> str:
        match = _STORY_BLOCK.search(prompt)
        return match.group(1).strip() if match else ""

    def _critique(self, prompt: str) -> str:
        names = []
        block = prompt.split("## Narrative Techniques", 1)[-1].split("## Story", 1)[0]
        for match in _TECHNIQUE_LINE.finditer(block):
            names.append(match.group(1))
        used = ", ".join(names) if names else "Suspense"
        return (
            f"### Techniques Used\n{used}\n"
            f"### Effectiveness\nEach device lands, though the middle sags.\n"
            f"### Comment\nSharpen the reversal and give the closing image one more beat."
        )

    def _revise(self, prompt: str) -> str:
        story = self._story_block(prompt)
        return (
            f"### New Story\n{story} The revision gives the reversal a sharper edge.\n"
            f"### Explanation\nTightened the middle and weighted the ending."
        )

    def _refine(self, prompt: str) -> str:
        story = self._story_block(prompt)
        lines = [line for line in story.split("\n") if _TAGGED_LINE.match(line)]
        if len(lines) > 1:
            lines.insert(1, "[new] Somewhere below, the road gives up its last light.")
        refined = "\n".join(lines)
        return f"### Analysis\nThe spine holds; the joints need grease.\n### Refined Story\n{refined}"

    def _transform(self, prompt: str) -> str:
        story = self._story_block(prompt)
        sentences = [s.strip() for s in re.split(r"(?<=[.!?])\s+", story) if s.strip()]
        while len(sentences) < 6:
            sentences.append("The night wears on.")
        thirds = max(len(sentences) // 3, 1)
        scenes = []
        for index in range(3):
            chunk = sentences[index * thirds: (index + 1) * thirds] or sentences[-1:]
            scenes.append({
                "index": index + 1,
                "background": chunk[0],
                "location": ("The Outer Hall", "The Long Gallery", "The Last Room")[index],
                "mode": "narrative" if index == 0 else "interactive",
                "is_flashback": False,
                "setups": {
                    "Blake": "Keeps close to the player and volunteers opinions.",
                    "Corin": "Watches from the edges and answers only direct questions.",
                },
                "plots": [
                    {"id": f"g{index + 1}p{j + 1}", "description": text}
                    for j, text in enumerate(chunk)
                ],
            })
        script = {
            "schema": "stagecraft-script/v1",
            "title": "The Road Below",
            "background": sentences[0],
            "roster": [
                {"name": "Avery", "description": "The guest who notices too much; the part the audience plays.", "is_player": True},
                {"name": "Blake", "description": "A talkative fixer whose favors always cost exactly too much.", "is_player": False},
                {"name": "Corin", "description": "A quiet observer keeping a ledger nobody has seen.", "is_player": False},
            ],
            "scenes": scenes,
        }
        import json as _json

        return "### Drama Script\n" + _json.dumps(script, ensure_ascii=False, indent=2)


def author_stub() -> MockProvider:
    return ScriptedAuthor().provider()


def offline_stub(policy: WalkthroughPolicy | None = None, adaptive: bool = True) -> MockProvider:
    """One provider that answers both session roles and generation roles;
    the zero-network default for the service and CLI.  Adaptive by default
    so demo sessions show a real accepted reflection diff."""
    drama = ScriptedDrama(policy, adaptive=adaptive)
    author = ScriptedAuthor()

    def dispatch(request: ChatRequest) -> str:
        if request.role in ("writer", "critic", "reviser", "judge", "refiner", "transformer"):
            return author(request)
        return drama(request)

    return MockProvider(stub=dispatch)
