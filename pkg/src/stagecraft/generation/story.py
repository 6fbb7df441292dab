"""Story value types for the generation pipeline."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Optional

from ..playbook import TechniqueSelection

REFINEMENT_PASSES = 3
PREMISE_WORD_RANGE = (50, 100)
TARGET_STORY_WORDS = 500  # soft target, never enforced


@dataclass(frozen=True)
class PremiseParagraph:
    text: str

    @property
    def word_count(self) -> int:
        return len(self.text.split())

    def length_warning(self) -> Optional[str]:
        lo, hi = PREMISE_WORD_RANGE
        if not (lo <= self.word_count <= hi):
            return (
                f"premise is {self.word_count} words; the expected range is "
                f"{lo}-{hi} words"
            )
        return None


@dataclass(frozen=True)
class Sentence:
    id: str
    text: str


_SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?…])\s+|\n+")


def split_sentences(text: str) -> list[str]:
    parts = _SENTENCE_BOUNDARY.split(text.strip())
    return [p.strip() for p in parts if p and p.strip()]


def number_sentences(texts: list[str], start: int = 1) -> tuple[Sentence, ...]:
    return tuple(Sentence(f"s{start + i}", t) for i, t in enumerate(texts))


@dataclass(frozen=True)
class Story:
    """A candidate or final story: ordered narrative sentences plus the
    sampled choices that produced it."""

    sentences: tuple[Sentence, ...]
    outline: str
    selection: TechniqueSelection
    revision_round: int = 0
    refinement_round: int = 0

    @property
    def text(self) -> str:
        return " ".join(s.text for s in self.sentences)

    @property
    def word_count(self) -> int:
        return len(self.text.split())

    def tagged_text(self) -> str:
        """One sentence per line with its id marker, as fed to the refiner."""
        return "\n".join(f"[{s.id}] {s.text}" for s in self.sentences)

    def next_sentence_number(self) -> int:
        highest = 0
        for s in self.sentences:
            m = re.fullmatch(r"s(\d+)", s.id)
            if m:
                highest = max(highest, int(m.group(1)))
        return highest + 1

    def with_sentences(self, sentences: tuple[Sentence, ...], **changes) -> "Story":
        return replace(self, sentences=sentences, **changes)


def story_from_text(text: str, outline: str, selection: TechniqueSelection) -> Story:
    sentences = number_sentences(split_sentences(text))
    if not sentences:
        raise ValueError("story text contains no sentences")
    return Story(sentences=sentences, outline=outline, selection=selection)


@dataclass(frozen=True)
class Critique:
    techniques_found: frozenset[str]
    effectiveness: str
    comment: str

    def missing_techniques(self, selection: TechniqueSelection) -> frozenset[str]:
        return selection.techniques - self.techniques_found


@dataclass(frozen=True)
class Ballot:
    judge: int  # 1-based judge index
    choice: int  # 1-based story index
    rationale: str


@dataclass(frozen=True)
class VoteRecord:
    ballots: tuple[Ballot, ...]
    winner: int  # 1-based story index
    tie: bool = False


@dataclass(frozen=True)
class RefinementPass:
    number: int  # 1-based pass index
    accepted: bool
    violation: str = ""  # why the pass fell back to the pre-pass story


@dataclass
class CandidateRecord:
    selection: TechniqueSelection
    initial: Optional[Story] = None
    critique: Optional[Critique] = None
    revised: Optional[Story] = None


@dataclass
class RunReport:
    """Everything a pipeline run produced, for audit and golden tests."""

    premise: str
    seed: int
    candidates: list[CandidateRecord] = field(default_factory=list)
    vote: Optional[VoteRecord] = None
    refinement_passes: list[RefinementPass] = field(default_factory=list)
    final: Optional[Story] = None
    warnings: list[str] = field(default_factory=list)
    calls: list[str] = field(default_factory=list)  # role tags, in call order

    def call_count(self) -> int:
        return len(self.calls)

    def to_json(self) -> dict:
        def story_json(story: Optional[Story]) -> Optional[dict]:
            if story is None:
                return None
            return {
                "outline": story.outline,
                "sentences": [{"id": s.id, "text": s.text} for s in story.sentences],
                "revision_round": story.revision_round,
                "refinement_round": story.refinement_round,
                "word_count": story.word_count,
            }

        return {
            "premise": self.premise,
            "seed": self.seed,
            "candidates": [
                {
                    "iteration": c.selection.iteration,
                    "situation": c.selection.situation,
                    "techniques": sorted(c.selection.techniques),
                    "initial": story_json(c.initial),
                    "critique": None if c.critique is None else {
                        "techniques_found": sorted(c.critique.techniques_found),
                        "effectiveness": c.critique.effectiveness,
                        "comment": c.critique.comment,
                    },
                    "revised": story_json(c.revised),
                }
                for c in self.candidates
            ],
            "vote": None if self.vote is None else {
                "ballots": [
                    {"judge": b.judge, "choice": b.choice, "rationale": b.rationale}
                    for b in self.vote.ballots
                ],
                "winner": self.vote.winner,
                "tie": self.vote.tie,
            },
            "refinement_passes": [
                {"number": p.number, "accepted": p.accepted, "violation": p.violation}
                for p in self.refinement_passes
            ],
            "final": story_json(self.final),
            "warnings": list(self.warnings),
            "calls": list(self.calls),
            "call_count": self.call_count(),
        }
