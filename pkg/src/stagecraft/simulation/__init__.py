"""Automated playthroughs with aggressive player personas."""

from .personas import PERSONA_COUNT, PlayerPersona, get_persona, load_personas, personas_bytes
from .reports import (
    COMPARE_ROWS,
    DEFAULT_MAX_TURNS,
    ComparisonRow,
    ComparisonTable,
    SimReport,
    compare_architectures,
    run_playthrough,
)
from .stubs import (
    INPUT_BANK,
    PERSONA_STYLES,
    ScriptedAuthor,
    ScriptedDrama,
    WalkthroughPolicy,
    author_stub,
    classify_bank_input,
    drama_stub,
    offline_stub,
    player_stub,
)

__all__ = [
    "COMPARE_ROWS",
    "ComparisonRow",
    "ComparisonTable",
    "DEFAULT_MAX_TURNS",
    "INPUT_BANK",
    "PERSONA_COUNT",
    "PERSONA_STYLES",
    "PlayerPersona",
    "ScriptedAuthor",
    "ScriptedDrama",
    "SimReport",
    "WalkthroughPolicy",
    "author_stub",
    "classify_bank_input",
    "compare_architectures",
    "drama_stub",
    "get_persona",
    "load_personas",
    "offline_stub",
    "personas_bytes",
    "player_stub",
    "run_playthrough",
]
