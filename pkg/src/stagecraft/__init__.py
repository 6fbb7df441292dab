"""stagecraft: an interactive-drama engine.

Generates dramatic stories and drama scripts from short premises through a
playwriting-guided pipeline, and runs those scripts as live multi-agent
dialogue sessions with a plot-chain state machine, periodic bounded
reflection, and configurable role-agent architectures.
"""

__version__ = "0.1.0"

from importlib import resources


def example_script_text() -> str:
    """The bundled three-scene mystery script, as schema JSON text."""
    return resources.files("stagecraft").joinpath("data/example_script.json").read_text(
        encoding="utf-8"
    )
