"""Service configuration from a simple ``key = value`` file."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional


@dataclass
class ServiceConfig:
    data_dir: Path = Path("./stagecraft-data")
    host: str = "127.0.0.1"
    port: int = 8075
    provider: str = "offline"  # offline | mock | http
    mock_playlist: Optional[Path] = None  # for provider = mock
    endpoint: str = ""
    model: str = ""
    api_key: str = ""
    reflection_period: Optional[int] = 5
    reflection_budget: int = 1
    auth_token: str = ""  # optional bearer-token stub
    extras: dict[str, str] = field(default_factory=dict)


def _strip_quotes(value: str) -> str:
    value = value.strip()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    return value


def parse_config_text(text: str) -> ServiceConfig:
    config = ServiceConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("["):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip().lower()
        value = _strip_quotes(value)
        if key == "data_dir":
            config.data_dir = Path(value)
        elif key == "host":
            config.host = value
        elif key == "port":
            config.port = int(value)
        elif key == "provider":
            if value not in ("offline", "mock", "http"):
                raise ValueError(f"config line {lineno}: unknown provider {value!r}")
            config.provider = value
        elif key == "mock_playlist":
            config.mock_playlist = Path(value)
        elif key == "endpoint":
            config.endpoint = value
        elif key == "model":
            config.model = value
        elif key == "api_key":
            config.api_key = value
        elif key in ("k", "reflection_period"):
            config.reflection_period = None if value.lower() in ("inf", "none", "") else int(value)
        elif key == "reflection_budget":
            config.reflection_budget = int(value)
        elif key == "auth_token":
            config.auth_token = value
        else:
            config.extras[key] = value
    return config


def load_config(path: Path | str) -> ServiceConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))
