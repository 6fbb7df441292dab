"""The candidate/critique/revise/vote/refine story pipeline.

One full run issues exactly fifteen provider calls on the happy path:
3 iterations x (writer + critic + reviser), 3 judges, and 3 refiners.
Repair retries for contract violations come on top and are bounded to one
per stage.  Candidate iterations run sequentially so playlist mocks and
golden files stay deterministic.
"""

from __future__ import annotations

import logging
import re
from typing import Optional

from ..gateway import (
    CREATIVE_TEMPERATURE,
    JUDGE_TEMPERATURE,
    GatewayError,
    MalformedDecisionError,
    Provider,
    chat_request,
    extract_tagged_block,
    parse_keyed_lines,
)
from ..playbook import Catalog, TechniqueSelection, load_catalog, sample_selections
from . import prompts
from .story import (
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
    story_from_text,
)

logger = logging.getLogger(__name__)

CANDIDATE_COUNT = 3
JUDGE_COUNT = 3


class PipelineError(Exception):
    """A pipeline stage failed; carries the report up to the failure point."""

    def __init__(self, stage: str, cause: Exception, iteration: int | None = None,
                 report: Optional[RunReport] = None):
        label = f"{stage} (iteration {iteration})" if iteration is not None else stage
        super().__init__(f"{label}: {cause}")
        self.stage = stage
        self.iteration = iteration
        self.cause = cause
        self.report = report


class UnparsableBallotError(GatewayError):
    """A judge response names no candidate."""


def _call(provider: Provider, role: str, prompt: str, *,
          temperature: float, report: Optional[RunReport] = None) -> str:
    request = chat_request("", prompt, temperature=temperature, role=role)
    exchange = provider.complete(request)
    if report is not None:
        report.calls.append(role)
    return exchange.response


def generate_candidate(
    premise: PremiseParagraph,
    selection: TechniqueSelection,
    provider: Provider,
    catalog: Optional[Catalog] = None,
    report: Optional[RunReport] = None,
) -> Story:
    """One writer call: outline plus complete story for this selection."""
    catalog = catalog or load_catalog()
    response = _call(
        provider, "writer", prompts.writer_prompt(premise.text, selection, catalog),
        temperature=CREATIVE_TEMPERATURE, report=report,
    )
    outline = extract_tagged_block(response, "Plot Outline")
    body = extract_tagged_block(response, "Complete Story")
    return story_from_text(body, outline, selection)


def _parse_technique_names(raw: str, catalog: Catalog) -> frozenset[str]:
    found = set()
    by_name = {t.name.lower(): t.id for t in catalog.techniques}
    by_id = {t.id.lower(): t.id for t in catalog.techniques}
    for part in re.split(r"[,\n]+", raw):
        label = part.strip().strip(".").lower()
        if not label:
            continue
        if label in by_name:
            found.add(by_name[label])
        elif label in by_id:
            found.add(by_id[label])
    return frozenset(found)


def critique_story(
    story: Story,
    provider: Provider,
    catalog: Optional[Catalog] = None,
    report: Optional[RunReport] = None,
) -> Critique:
    """One critic call checking technique usage and proposing improvements."""
    if not story.sentences:
        raise ValueError("cannot critique an empty story")
    catalog = catalog or load_catalog()
    response = _call(
        provider, "critic", prompts.critic_prompt(story.text, story.selection, catalog),
        temperature=JUDGE_TEMPERATURE, report=report,
    )
    names = _parse_technique_names(extract_tagged_block(response, "Techniques Used"), catalog)
    outside = names - story.selection.techniques
    if outside:
        logger.warning("critic named techniques outside the selection: %s", sorted(outside))
    comment = extract_tagged_block(response, "Comment")
    if not comment:
        raise MalformedDecisionError("critique comment is empty")
    effectiveness = ""
    try:
        effectiveness = extract_tagged_block(response, "Effectiveness")
    except GatewayError:
        pass
    return Critique(
        techniques_found=names & story.selection.techniques,
        effectiveness=effectiveness,
        comment=comment,
    )


def revise_story(
    story: Story,
    critique: Critique,
    provider: Provider,
    report: Optional[RunReport] = None,
) -> Story:
    """One writer call applying the critique; the critique comment travels
    verbatim in the prompt so the adherence loop is auditable."""
    if not critique.comment:
        raise ValueError("critique comment must be nonempty")
    response = _call(
        provider, "reviser", prompts.reviser_prompt(story.text, critique.comment),
        temperature=CREATIVE_TEMPERATURE, report=report,
    )
    body = extract_tagged_block(response, "New Story")
    revised = story_from_text(body, story.outline, story.selection)
    return revised.with_sentences(
        revised.sentences,
        revision_round=story.revision_round + 1,
        refinement_round=story.refinement_round,
    )


def _parse_ballot(response: str, judge: int) -> Ballot:
    fields = parse_keyed_lines(response, multiline_keys=frozenset({"RATIONALE"}))
    raw = fields.get("BEST", "")
    match = re.search(r"[123]", raw)
    if not match:
        raise UnparsableBallotError(f"judge {judge} named no candidate: {raw!r}")
    return Ballot(judge=judge, choice=int(match.group(0)), rationale=fields.get("RATIONALE", ""))


def vote_best(
    candidates: list[Story],
    provider: Provider,
    report: Optional[RunReport] = None,
) -> VoteRecord:
    """Three independent judge calls with disjoint contexts; majority wins.

    A full three-way tie falls back to the lowest candidate index present
    on any ballot, and the record is flagged as a tie.
    """
    if len(candidates) != CANDIDATE_COUNT:
        raise ValueError(f"vote_best needs exactly {CANDIDATE_COUNT} candidates, got {len(candidates)}")
    prompt = prompts.judge_prompt([c.text for c in candidates])
    ballots = []
    for judge in range(1, JUDGE_COUNT + 1):
        response = _call(provider, "judge", prompt, temperature=JUDGE_TEMPERATURE, report=report)
        ballots.append(_parse_ballot(response, judge))

    counts: dict[int, int] = {}
    for ballot in ballots:
        counts[ballot.choice] = counts.get(ballot.choice, 0) + 1
    top = max(counts.values())
    leaders = sorted(choice for choice, n in counts.items() if n == top)
    tie = len(leaders) > 1
    if tie:
        logger.info("vote tie between candidates %s; picking lowest index", leaders)
    return VoteRecord(ballots=tuple(ballots), winner=leaders[0], tie=tie)


_REFINED_LINE = re.compile(r"^\[(s\d+|new)\]\s*(.*\S)\s*$")


def _parse_refined(block: str, story: Story) -> tuple[Sentence, ...]:
    """Rebuild the sentence list from a refiner response, enforcing the
    insertion/elaboration-only contract: every original id, in order, no
    duplicates, no unknown ids."""
    entries: list[tuple[str, str]] = []
    for line in block.split("\n"):
        line = line.strip()
        if not line:
            continue
        match = _REFINED_LINE.match(line)
        if not match:
            raise MalformedDecisionError(f"refined line has no [id] marker: {line[:60]!r}")
        entries.append((match.group(1), match.group(2)))

    original_ids = [s.id for s in story.sentences]
    kept = [tag for tag, _ in entries if tag != "new"]
    if kept != original_ids:
        missing = [i for i in original_ids if i not in kept]
        if missing:
            raise MalformedDecisionError(f"refinement dropped sentences: {missing}")
        unknown = [i for i in kept if i not in original_ids]
        if unknown:
            raise MalformedDecisionError(f"refinement invented ids: {unknown}")
        raise MalformedDecisionError("refinement reordered or duplicated sentences")

    next_number = story.next_sentence_number()
    sentences: list[Sentence] = []
    for tag, text in entries:
        if tag == "new":
            sentences.append(Sentence(f"s{next_number}", text))
            next_number += 1
        else:
            sentences.append(Sentence(tag, text))
    return tuple(sentences)


def refine_story(
    story: Story,
    provider: Provider,
    report: Optional[RunReport] = None,
) -> Story:
    """One refiner pass: elaborate sentences in place or insert new ones
    between them.  A contract-violating response is retried once; if the
    retry also violates, the pass falls back to the pre-pass story.
    """
    if story.refinement_round >= REFINEMENT_PASSES:
        raise ValueError(f"refinement already ran {REFINEMENT_PASSES} passes")
    prompt = prompts.refiner_prompt(story.tagged_text())
    pass_number = story.refinement_round + 1
    violation = ""
    sentences: Optional[tuple[Sentence, ...]] = None

    for attempt in range(2):
        if attempt == 0:
            response = _call(provider, "refiner", prompt,
                             temperature=CREATIVE_TEMPERATURE, report=report)
        else:
            response = _call(
                provider, "refiner", prompts.repair_prompt(violation, response),
                temperature=CREATIVE_TEMPERATURE, report=report,
            )
        try:
            block = extract_tagged_block(response, "Refined Story")
            sentences = _parse_refined(block, story)
            break
        except (MalformedDecisionError, GatewayError) as exc:
            violation = str(exc)
            logger.warning("refinement pass %d attempt %d violated the contract: %s",
                           pass_number, attempt + 1, violation)

    if report is not None:
        report.refinement_passes.append(
            RefinementPass(pass_number, accepted=sentences is not None, violation=violation)
        )
    if sentences is None:
        # keep the pre-pass story; the pass still counts
        return story.with_sentences(story.sentences, refinement_round=pass_number)
    return story.with_sentences(sentences, refinement_round=pass_number)


def run_pipeline(
    premise: PremiseParagraph,
    rng_seed: int,
    provider: Provider,
    catalog: Optional[Catalog] = None,
    revise_rounds: int = 1,
) -> tuple[Story, RunReport]:
    """Run the whole pipeline: sample, 3 x (write, critique, revise), vote,
    3 x refine.  Returns the final story and the full run report; any stage
    error raises PipelineError carrying the report up to the failure point.

    ``revise_rounds`` is the critique/revise count per candidate; the
    default single round gives the canonical 15-call shape.
    """
    if not premise.text.strip():
        raise ValueError("premise must be nonempty")
    if revise_rounds < 1:
        raise ValueError("revise_rounds must be >= 1")
    catalog = catalog or load_catalog()
    report = RunReport(premise=premise.text, seed=rng_seed)
    warning = premise.length_warning()
    if warning:
        report.warnings.append(warning)

    selections = sample_selections(rng_seed, catalog)
    candidates: list[Story] = []
    for selection in selections:
        record = CandidateRecord(selection=selection)
        report.candidates.append(record)
        try:
            record.initial = generate_candidate(premise, selection, provider, catalog, report)
            story = record.initial
            for _ in range(revise_rounds):
                record.critique = critique_story(story, provider, catalog, report)
                missing = record.critique.missing_techniques(selection)
                if missing:
                    report.warnings.append(
                        f"iteration {selection.iteration}: critic reports missing techniques "
                        f"{sorted(missing)}"
                    )
                story = revise_story(story, record.critique, provider, report)
            record.revised = story
        except (GatewayError, ValueError) as exc:
            raise PipelineError("candidate", exc, iteration=selection.iteration, report=report) from exc
        candidates.append(record.revised)

    try:
        vote = vote_best(candidates, provider, report)
    except (GatewayError, ValueError) as exc:
        raise PipelineError("vote", exc, report=report) from exc
    report.vote = vote

    story = candidates[vote.winner - 1]
    for _ in range(REFINEMENT_PASSES):
        try:
            story = refine_story(story, provider, report)
        except (GatewayError, ValueError) as exc:
            raise PipelineError("refinement", exc, report=report) from exc

    report.final = story
    return story, report
