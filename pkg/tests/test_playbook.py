"""Catalog fidelity and sampling behavior."""

from __future__ import annotations

import hashlib
from collections import Counter

from stagecraft.playbook import (
    TechniqueSelection,
    catalog_bytes,
    catalog_prompt_text,
    load_catalog,
    sample_selections,
)

# load-once constants: any edit to the shipped catalog text must be deliberate
CATALOG_SHA256 = "34537d999f6ba5212d9d6093de20ad731ec7aeb954a52001ffd2bd082ef47a30"

SITUATION_IDS = {
    "Love", "Phoenix", "Cinderella", "LoveTriangle", "Revenge", "Family", "Reunion", "Savior",
}
TECHNIQUE_IDS = {"Suspense", "Twist", "NonLinear", "MultipleNarrative", "Irony", "Symbolism"}


class TestCatalog:
    def test_pinned_hash(self):
        assert hashlib.sha256(catalog_bytes()).hexdigest() == CATALOG_SHA256

    def test_exactly_eight_situations_six_techniques(self):
        catalog = load_catalog()
        assert {s.id for s in catalog.situations} == SITUATION_IDS
        assert {t.id for t in catalog.techniques} == TECHNIQUE_IDS
        for situation in catalog.situations:
            assert len(situation.acts) == 3

    def test_load_is_cached(self):
        assert load_catalog() is load_catalog()


class TestSampling:
    def test_deterministic_per_seed(self):
        assert sample_selections(42) == sample_selections(42)
        assert sample_selections(42) != sample_selections(43)

    def test_postconditions_across_seeds(self):
        for seed in range(200):
            selections = sample_selections(seed)
            assert len(selections) == 3
            situations = [s.situation for s in selections]
            assert len(set(situations)) == 3
            technique_sets = [s.techniques for s in selections]
            assert len(set(technique_sets)) == 3
            for selection in selections:
                assert len(selection.techniques) == 3
                assert selection.techniques <= TECHNIQUE_IDS
            assert [s.iteration for s in selections] == [1, 2, 3]

    def test_first_slot_uniformity(self):
        # frequency of each situation in the first slot over 10k seeds: 1/8 +- 0.02
        counts = Counter(sample_selections(seed)[0].situation for seed in range(10_000))
        for situation in SITUATION_IDS:
            assert abs(counts[situation] / 10_000 - 1 / 8) < 0.02, (situation, counts[situation])


class TestPromptText:
    def test_love_selection_renders_acts_and_techniques(self):
        catalog = load_catalog()
        selection = TechniqueSelection(
            situation="Love", techniques=frozenset({"Suspense", "Twist", "Irony"}), iteration=1
        )
        text = catalog_prompt_text(selection, catalog)
        for act in catalog.situation("Love").acts:
            assert act in text
        for technique_id in ("Suspense", "Twist", "Irony"):
            assert catalog.technique(technique_id).description in text

    def test_nonlinear_contains_flashback_description(self):
        selection = TechniqueSelection(
            situation="Revenge", techniques=frozenset({"NonLinear", "Twist", "Irony"}), iteration=1
        )
        text = catalog_prompt_text(selection)
        assert "Flashbacks reveal events from the past" in text
        assert "flash-forwards show future events" in text

    def test_pure_function(self):
        selection = sample_selections(9)[1]
        assert catalog_prompt_text(selection) == catalog_prompt_text(selection)
