"""Structured-output extraction from LLM completions.

Two formats flow through here:

* ``###``-headed sections (story pipeline responses);
* line-oriented ``KEY: value`` records (decision grammar), which are easier
  to repair-prompt and to parse bit-exactly than free-form JSON.

The decision grammar is documented in ``docs/decision-grammar.md``.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .types import GatewayError

logger = logging.getLogger(__name__)


class MissingSectionError(GatewayError):
    def __init__(self, tag: str):
        super().__init__(f"response has no '### {tag}' section")
        self.tag = tag


class MalformedDecisionError(GatewayError):
    """Decision grammar violation; the caller may retry once with a repair
    prompt before failing the turn."""


class InputClass(str, Enum):
    IN_PLOT = "InPlot"
    DAILY = "Daily"
    BREAKING = "Breaking"


class ReplyStrategy(str, Enum):
    AVOID = "Avoid"
    IGNORE_QUESTION = "IgnoreQuestion"
    ASSOCIATE = "Associate"


_SECTION_RE = re.compile(r"^###\s+(.*?)\s*$")


def _normalize(text: str) -> str:
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    return "\n".join(line.rstrip() for line in text.split("\n"))


def find_tagged_blocks(response: str, tag: str) -> list[str]:
    """All ``### tag`` section bodies, in order of appearance."""
    lines = _normalize(response).split("\n")
    blocks: list[str] = []
    current: Optional[list[str]] = None
    for line in lines:
        match = _SECTION_RE.match(line)
        if match:
            if current is not None:
                blocks.append("\n".join(current).strip())
                current = None
            if match.group(1) == tag:
                current = []
        elif current is not None:
            current.append(line)
    if current is not None:
        blocks.append("\n".join(current).strip())
    return blocks


def extract_tagged_block(response: str, tag: str) -> str:
    """Content of the named ``###`` section, whitespace-normalized.

    If several sections share the tag the first wins and the ambiguity is
    logged.  Raises MissingSectionError when the tag is absent.
    """
    blocks = find_tagged_blocks(response, tag)
    if not blocks:
        raise MissingSectionError(tag)
    if len(blocks) > 1:
        logger.warning("response contains %d '### %s' sections; using the first", len(blocks), tag)
    return blocks[0]


_KEY_LINE_RE = re.compile(r"^([A-Z]+):\s?(.*)$")


def parse_keyed_lines(text: str, multiline_keys: frozenset[str] = frozenset()) -> dict[str, str]:
    """Parse a ``KEY: value`` record.

    Keys are uppercase at column 0.  A key in ``multiline_keys`` absorbs
    following lines until the next key line.  Text before the first key is
    ignored (models like to preamble).  Duplicate keys are an error.
    """
    fields: dict[str, str] = {}
    active: Optional[str] = None
    buffer: list[str] = []

    def flush():
        nonlocal active, buffer
        if active is not None:
            fields[active] = "\n".join(buffer).strip()
        active = None
        buffer = []

    for line in _normalize(text).split("\n"):
        match = _KEY_LINE_RE.match(line)
        if match:
            key, value = match.group(1), match.group(2)
            if key in fields or key == active:
                raise MalformedDecisionError(f"duplicate key {key}")
            flush()
            if key in multiline_keys:
                active = key
                buffer = [value]
            else:
                fields[key] = value.strip()
        elif active is not None:
            buffer.append(line)
        # else: preamble or trailing prose, ignored
    flush()
    return fields


def parse_id_list(value: str, key: str = "COMPLETED") -> tuple[str, ...]:
    value = value.strip()
    if not (value.startswith("[") and value.endswith("]")):
        raise MalformedDecisionError(f"{key} must be a bracketed list, e.g. [] or [p1, p2]")
    inner = value[1:-1].strip()
    if not inner:
        return ()
    return tuple(part.strip() for part in inner.split(",") if part.strip())


@dataclass(frozen=True)
class DecisionFields:
    """Raw fields of a decision response: the plot-completion assertions
    plus the utterance payload."""

    completed: tuple[str, ...]
    speaker: str
    to: str
    say: str
    action: Optional[str] = None
    input_class: InputClass = InputClass.IN_PLOT
    strategy: Optional[ReplyStrategy] = None


DECISION_KEYS = frozenset({"COMPLETED", "SPEAKER", "TO", "SAY", "ACTION", "CLASS", "STRATEGY"})
_DECISION_MULTILINE = frozenset({"SAY", "ACTION"})


def _parse_class(fields: dict[str, str]) -> InputClass:
    raw = fields.get("CLASS", InputClass.IN_PLOT.value)
    try:
        return InputClass(raw)
    except ValueError:
        raise MalformedDecisionError(
            f"CLASS must be one of InPlot, Daily, Breaking; got {raw!r}"
        ) from None


def _parse_strategy(fields: dict[str, str]) -> Optional[ReplyStrategy]:
    if "STRATEGY" not in fields:
        return None
    raw = fields["STRATEGY"]
    try:
        return ReplyStrategy(raw)
    except ValueError:
        raise MalformedDecisionError(
            f"STRATEGY must be one of Avoid, IgnoreQuestion, Associate; got {raw!r}"
        ) from None


def extract_structured_decision(response: str) -> DecisionFields:
    """Parse a decision record: completion assertions + utterance payload.

    Grammar violations raise MalformedDecisionError with a message precise
    enough to drive the single repair prompt.
    """
    fields = parse_keyed_lines(response, _DECISION_MULTILINE)
    unknown = set(fields) - DECISION_KEYS
    if unknown:
        raise MalformedDecisionError(f"unknown keys: {sorted(unknown)}")
    missing = [k for k in ("COMPLETED", "SPEAKER", "TO", "SAY") if k not in fields]
    if missing:
        raise MalformedDecisionError(f"missing required keys: {missing}")
    if not fields["SPEAKER"]:
        raise MalformedDecisionError("SPEAKER must name a character")
    if not fields["SAY"]:
        raise MalformedDecisionError("SAY must be nonempty")

    return DecisionFields(
        completed=parse_id_list(fields["COMPLETED"]),
        speaker=fields["SPEAKER"],
        to=fields["TO"] or "all",
        say=fields["SAY"],
        action=fields.get("ACTION") or None,
        input_class=_parse_class(fields),
        strategy=_parse_strategy(fields),
    )


def require_strategy_coherence(
    input_class: InputClass, strategy: Optional[ReplyStrategy]
) -> None:
    """Raise (repairably) when an off-plot class arrives without a strategy.
    The opposite violation -- a strategy on an InPlot turn -- is handled by
    dropping the strategy with a warning, not by re-prompting."""
    if input_class is not InputClass.IN_PLOT and strategy is None:
        raise MalformedDecisionError(
            f"{input_class.value} turns require a STRATEGY "
            f"(Avoid, IgnoreQuestion, Associate)"
        )


DIRECTOR_KEYS = frozenset({"COMPLETED", "TARGET", "MOTIVATION", "CLASS", "STRATEGY"})
_DIRECTOR_MULTILINE = frozenset({"MOTIVATION"})


@dataclass(frozen=True)
class DirectorFields:
    completed: tuple[str, ...]
    target: str
    motivation: str
    input_class: InputClass = InputClass.IN_PLOT
    strategy: Optional[ReplyStrategy] = None


def extract_director_fields(response: str) -> DirectorFields:
    """Parse a director record: completions, chosen actor, and motivation."""
    fields = parse_keyed_lines(response, _DIRECTOR_MULTILINE)
    unknown = set(fields) - DIRECTOR_KEYS
    if unknown:
        raise MalformedDecisionError(f"unknown keys: {sorted(unknown)}")
    missing = [k for k in ("COMPLETED", "TARGET", "MOTIVATION") if k not in fields]
    if missing:
        raise MalformedDecisionError(f"missing required keys: {missing}")
    if not fields["TARGET"]:
        raise MalformedDecisionError("TARGET must name a character")
    if not fields["MOTIVATION"]:
        raise MalformedDecisionError("MOTIVATION must be nonempty")
    return DirectorFields(
        completed=parse_id_list(fields["COMPLETED"]),
        target=fields["TARGET"],
        motivation=fields["MOTIVATION"],
        input_class=_parse_class(fields),
        strategy=_parse_strategy(fields),
    )
