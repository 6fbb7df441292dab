"""Story-to-script transformation: segment the finished story into a
3-5 scene drama script, isolating flashbacks into their own scenes."""

from __future__ import annotations

import json
import logging
import re
from typing import Optional

from ..gateway import CREATIVE_TEMPERATURE, Provider, chat_request, extract_tagged_block
from ..script import DramaScript, script_from_json
from . import prompts
from .story import REFINEMENT_PASSES, RunReport, Story

logger = logging.getLogger(__name__)

SCENE_RANGE = (3, 5)


class SegmentationError(ValueError):
    """The transformer could not produce a 3-5 scene script, even after the
    single repair retry."""


_FENCE_RE = re.compile(r"^```[a-zA-Z]*\n(.*)\n```$", re.DOTALL)


def _script_json(response: str) -> dict:
    block = extract_tagged_block(response, "Drama Script")
    fenced = _FENCE_RE.match(block.strip())
    if fenced:
        block = fenced.group(1)
    data = json.loads(block)
    if not isinstance(data, dict):
        raise ValueError("script document must be a JSON object")
    return data


def story_to_script(
    story: Story,
    provider: Provider,
    report: Optional[RunReport] = None,
) -> DramaScript:
    """One transformer call (plus at most one repair) turning the refined
    story into a validated drama script."""
    if story.refinement_round != REFINEMENT_PASSES:
        raise ValueError(
            f"story_to_script needs a fully refined story "
            f"({REFINEMENT_PASSES} passes, got {story.refinement_round})"
        )

    prompt = prompts.transformer_prompt(story.text)
    problem = ""
    data: Optional[dict] = None
    response = ""
    for attempt in range(2):
        if attempt == 0:
            request = chat_request("", prompt, temperature=CREATIVE_TEMPERATURE, role="transformer")
        else:
            request = chat_request(
                "", prompts.repair_prompt(problem, response),
                temperature=CREATIVE_TEMPERATURE, role="transformer",
            )
        response = provider.complete(request).response
        if report is not None:
            report.calls.append("transformer")
        try:
            candidate = _script_json(response)
        except (ValueError, KeyError) as exc:
            problem = f"the reply was not a parseable script document ({exc})"
            logger.warning("transformer attempt %d: %s", attempt + 1, problem)
            continue
        scene_count = len(candidate.get("scenes", []))
        if not SCENE_RANGE[0] <= scene_count <= SCENE_RANGE[1]:
            problem = (
                f"the script has {scene_count} scenes; it must have "
                f"{SCENE_RANGE[0]}-{SCENE_RANGE[1]}"
            )
            logger.warning("transformer attempt %d: %s", attempt + 1, problem)
            continue
        data = candidate
        break

    if data is None:
        raise SegmentationError(problem)
    return script_from_json(data, generated=True)
