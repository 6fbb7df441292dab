"""Catalogs of dramatic situations and narrative techniques, plus the
per-iteration sampling used by the story pipeline.

The catalog ships as a data file so alternate catalogs can be swapped in
via configuration without touching code.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

SELECTION_COUNT = 3  # story candidates per run
TECHNIQUES_PER_SELECTION = 3


@dataclass(frozen=True)
class DramaticSituation:
    id: str
    name: str
    acts: tuple[str, str, str]  # setup, confrontation, resolution
    exemplar: str


@dataclass(frozen=True)
class NarrativeTechnique:
    id: str
    name: str
    description: str


@dataclass(frozen=True)
class Catalog:
    situations: tuple[DramaticSituation, ...]
    techniques: tuple[NarrativeTechnique, ...]

    def situation(self, situation_id: str) -> DramaticSituation:
        for s in self.situations:
            if s.id == situation_id:
                return s
        raise KeyError(f"unknown dramatic situation: {situation_id!r}")

    def technique(self, technique_id: str) -> NarrativeTechnique:
        for t in self.techniques:
            if t.id == technique_id:
                return t
        raise KeyError(f"unknown narrative technique: {technique_id!r}")


@dataclass(frozen=True)
class TechniqueSelection:
    """One pipeline iteration's sampled situation and technique triple."""

    situation: str
    techniques: frozenset[str]
    iteration: int  # 1-based

    def ordered_techniques(self, catalog: Catalog) -> list[str]:
        return [t.id for t in catalog.techniques if t.id in self.techniques]


def catalog_bytes() -> bytes:
    return resources.files("stagecraft.playbook").joinpath("data/catalog.json").read_bytes()


@lru_cache(maxsize=1)
def load_catalog() -> Catalog:
    data = json.loads(catalog_bytes().decode("utf-8"))
    situations = tuple(
        DramaticSituation(s["id"], s["name"], tuple(s["acts"]), s["exemplar"])
        for s in data["situations"]
    )
    techniques = tuple(
        NarrativeTechnique(t["id"], t["name"], t["description"])
        for t in data["techniques"]
    )
    if len(situations) != 8:
        raise ValueError(f"situation catalog must hold exactly 8 entries, got {len(situations)}")
    if len(techniques) != 6:
        raise ValueError(f"technique catalog must hold exactly 6 entries, got {len(techniques)}")
    return Catalog(situations, techniques)


def sample_selections(rng_seed: int, catalog: Catalog | None = None) -> list[TechniqueSelection]:
    """Uniformly sample the three iterations' playwriting choices.

    The three situations are pairwise distinct and the three technique
    triples are pairwise distinct as sets (two triples may still share up
    to two techniques).  Deterministic for a given seed.
    """
    catalog = catalog or load_catalog()
    rng = random.Random(rng_seed)

    situation_ids = [s.id for s in catalog.situations]
    chosen_situations = rng.sample(situation_ids, SELECTION_COUNT)

    technique_ids = [t.id for t in catalog.techniques]
    chosen_sets: list[frozenset[str]] = []
    while len(chosen_sets) < SELECTION_COUNT:
        candidate = frozenset(rng.sample(technique_ids, TECHNIQUES_PER_SELECTION))
        if candidate not in chosen_sets:
            chosen_sets.append(candidate)

    return [
        TechniqueSelection(situation=s, techniques=ts, iteration=i + 1)
        for i, (s, ts) in enumerate(zip(chosen_situations, chosen_sets))
    ]


def situation_prompt_text(situation: DramaticSituation) -> str:
    lines = [f"{situation.name}:"]
    lines += [f"- {act}" for act in situation.acts]
    return "\n".join(lines)


def catalog_prompt_text(selection: TechniqueSelection, catalog: Catalog | None = None) -> str:
    """Render the chosen situation's act lines and technique descriptions
    as the prompt fragment consumed by the writer and critic.  Pure.
    """
    catalog = catalog or load_catalog()
    situation = catalog.situation(selection.situation)
    parts = ["Dramatic Situation:", situation_prompt_text(situation), "", "Narrative Techniques:"]
    for technique_id in selection.ordered_techniques(catalog):
        t = catalog.technique(technique_id)
        parts.append(f"{t.name}: {t.description}")
    return "\n".join(parts)


def techniques_prompt_text(selection: TechniqueSelection, catalog: Catalog | None = None) -> str:
    catalog = catalog or load_catalog()
    return "\n".join(
        f"{catalog.technique(tid).name}: {catalog.technique(tid).description}"
        for tid in selection.ordered_techniques(catalog)
    )
