"""Playwriting-guided story generation and the story-to-script transform."""

from .pipeline import (
    CANDIDATE_COUNT,
    JUDGE_COUNT,
    PipelineError,
    UnparsableBallotError,
    critique_story,
    generate_candidate,
    refine_story,
    revise_story,
    run_pipeline,
    vote_best,
)
from .scripting import SCENE_RANGE, SegmentationError, story_to_script
from .story import (
    PREMISE_WORD_RANGE,
    REFINEMENT_PASSES,
    Ballot,
    CandidateRecord,
    Critique,
    PremiseParagraph,
    RefinementPass,
    RunReport,
    Sentence,
    Story,
    VoteRecord,
    split_sentences,
    story_from_text,
)

__all__ = [
    "Ballot",
    "CANDIDATE_COUNT",
    "CandidateRecord",
    "Critique",
    "JUDGE_COUNT",
    "PREMISE_WORD_RANGE",
    "PipelineError",
    "PremiseParagraph",
    "REFINEMENT_PASSES",
    "RefinementPass",
    "RunReport",
    "SCENE_RANGE",
    "SegmentationError",
    "Sentence",
    "Story",
    "UnparsableBallotError",
    "VoteRecord",
    "critique_story",
    "generate_candidate",
    "refine_story",
    "revise_story",
    "run_pipeline",
    "split_sentences",
    "story_from_text",
    "story_to_script",
    "vote_best",
]
