"""Prompt templates for the story pipeline.

Every template renders to a single user message; calls are stateless, so
anything a stage needs (story text, critique, sentence ids) is embedded in
the prompt itself.  Output formats use ``###`` section headers so responses
parse bit-exactly.
"""

from __future__ import annotations

from ..playbook import Catalog, TechniqueSelection, catalog_prompt_text, techniques_prompt_text

WRITER_TEMPLATE = """\
## Task
Create a dramatic story from the protagonist's perspective based on the premise paragraph. \
The premise paragraph may include the background of the story, the protagonist, the beginning, \
and the ending.
Interactive drama differs from traditional drama in that the audience also plays a character \
in the story, namely the protagonist, and can interact with the characters in the drama to \
experience the story firsthand.

## Premise Paragraph
{premise}

{catalog}

## Workflow
1. The creation must follow the specified dramatic situation, and all the listed narrative \
techniques must be used.
2. First, provide introductions to the main characters in the drama other than the \
protagonist, with each character description being around 100 words. Also, give a brief \
introduction to the protagonist.
- Characters must be specific individuals; vague roles such as "classmates around" or \
"audience" are not allowed.
3. You should firstly create a plot outline, around 100 words.
4. Expand the plot outline into a complete story, around 500 words.
- Note: If multiple narratives are used, the protagonist will temporarily switch to another \
character.

## Output Format
### Plot Outline
### Complete Story
### Technique Explanation (briefly explain how the techniques are reflected in the story)
"""

CRITIC_TEMPLATE = """\
## Task
Evaluate the given dramatic story from the perspective of dramatic techniques and provide \
comment for improvement.

## Narrative Techniques
{techniques}

## Story
{story}

## Requirements
Understand the given dramatic techniques, identify which techniques are used in the story, \
up to three. Evaluate whether these techniques are applied effectively, for example, whether \
the twist has an impact, or if the non-linear narrative has separate scenes. Provide comment \
for improvement.

## Output Format
### Techniques Used
(comma-separated names of the techniques actually present)
### Effectiveness
### Comment
"""

REVISER_TEMPLATE = """\
## Task
Revise the story based on the comments provided.

## Requirements
Carefully analyze the comments provided. You can revise the scenes or the characters.

## Story
{story}

## Comment
{comment}

## Output Format
### New Story
### Explanation (briefly explain the improvements made to the new story)
"""

JUDGE_TEMPLATE = """\
## Task
You are an independent judge of dramatic writing. Three candidate stories follow. Pick the \
one with the strongest dramatic structure, conflict, and emotional impact.

{stories}

## Output Format
BEST: <story number, 1-3>
RATIONALE: <one or two sentences>
"""

REFINER_TEMPLATE = """\
## Task
Refine the plot of the story.

## Requirements
Refine the plot from multiple dimensions.
- Coherence: Analyze the logical relationships between narratives, and modify or add new \
narrative sentences to enhance coherence.
- Detail: Find out what is not specific enough in each plot and refine these details, no \
limit on the number of words; if there is suspense in the narrative process, portray the \
suspense finely.

The story is given one narrative sentence per line, each prefixed with its id in square \
brackets. Keep every existing sentence (you may expand it in place, keeping its id), and \
insert new sentences between existing ones on their own lines prefixed with [new]. Never \
delete or reorder existing sentences.

## Story
{story}

## Output Format
### Analysis (analyze multiple dimensions of the current story)
### Refined Story
(one sentence per line: "[s3] expanded text" for existing ids, "[new] inserted text" for \
additions)
"""

TRANSFORMER_TEMPLATE = """\
## Task
Post-process the finished story into a standard drama script. A drama script follows an \
episodic structure: each scene has an independent character setup, because characters' \
thoughts can shift throughout the story, and each scene contains a sequence of plots \
detailing the story's progression.

## Story
{story}

## Requirements
1. Segment the story into 3-5 scenes. For each scene, extract and adjust the narrative \
sentences into a sequence of plots. Any flashback or flashforward must be isolated as an \
independent scene with "is_flashback" set to true.
2. Craft each scene's background, location, and per-character setup from the story content. \
This step introduces no creative work: process information directly from the story.
3. Exactly one roster entry is the protagonist the audience plays; mark it "is_player": true.
4. Emit the script as JSON with this shape:
{{"schema": "stagecraft-script/v1", "title": ..., "background": ...,
  "roster": [{{"name", "description", "is_player"}}],
  "scenes": [{{"index", "background", "location", "mode": "narrative"|"interactive",
             "is_flashback", "setups": {{name: text}},
             "plots": [{{"id", "description", "owner"?}}]}}]}}

## Output Format
### Drama Script
(the JSON document only)
"""

REPAIR_TEMPLATE = """\
Your previous reply could not be used: {problem}

Reply again, following the required output format exactly. Previous reply:
{previous}
"""


def writer_prompt(premise: str, selection: TechniqueSelection, catalog: Catalog) -> str:
    return WRITER_TEMPLATE.format(premise=premise, catalog=catalog_prompt_text(selection, catalog))


def critic_prompt(story_text: str, selection: TechniqueSelection, catalog: Catalog) -> str:
    return CRITIC_TEMPLATE.format(
        techniques=techniques_prompt_text(selection, catalog), story=story_text
    )


def reviser_prompt(story_text: str, comment: str) -> str:
    return REVISER_TEMPLATE.format(story=story_text, comment=comment)


def judge_prompt(story_texts: list[str]) -> str:
    stories = "\n\n".join(
        f"## Story {i + 1}\n{text}" for i, text in enumerate(story_texts)
    )
    return JUDGE_TEMPLATE.format(stories=stories)


def refiner_prompt(tagged_sentences: str) -> str:
    return REFINER_TEMPLATE.format(story=tagged_sentences)


def transformer_prompt(story_text: str) -> str:
    return TRANSFORMER_TEMPLATE.format(story=story_text)


def repair_prompt(problem: str, previous: str) -> str:
    return REPAIR_TEMPLATE.format(problem=problem, previous=previous)
