"""Aggressive player-persona catalog (ships as a data file, hash-pinned)."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

PERSONA_COUNT = 10


@dataclass(frozen=True)
class PlayerPersona:
    name: str
    description: str  # used as the player agent's system prompt


def personas_bytes() -> bytes:
    return resources.files("stagecraft.simulation").joinpath("data/personas.json").read_bytes()


@lru_cache(maxsize=1)
def load_personas() -> tuple[PlayerPersona, ...]:
    data = json.loads(personas_bytes().decode("utf-8"))
    personas = tuple(PlayerPersona(p["name"], p["description"]) for p in data["personas"])
    if len(personas) != PERSONA_COUNT:
        raise ValueError(f"persona catalog must hold exactly {PERSONA_COUNT} entries")
    return personas


def get_persona(name: str) -> PlayerPersona:
    wanted = name.strip().lower().replace("-", " ").replace("_", " ")
    for persona in load_personas():
        if persona.name.lower() == wanted:
            return persona
    # single-word convenience: "grumpy" matches "Grumpy Guy"
    for persona in load_personas():
        if wanted in persona.name.lower():
            return persona
    raise KeyError(f"unknown persona: {name!r}")
