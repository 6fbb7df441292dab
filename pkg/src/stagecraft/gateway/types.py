"""Provider-agnostic chat types, decoding defaults, and gateway errors."""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass, field
from typing import Iterable, Optional


def _env_float(name: str, default: float) -> float:
    raw = os.environ.get(name, "")
    try:
        return float(raw) if raw else default
    except ValueError:
        return default


# Declared decoding defaults: creative roles (writer, reviser, refiner,
# actors, the one-for-all agent) vs judging roles (critic, voters,
# classifier, reflection).  Overridable per deployment via environment.
CREATIVE_TEMPERATURE = _env_float("STAGECRAFT_CREATIVE_TEMPERATURE", 0.8)
JUDGE_TEMPERATURE = _env_float("STAGECRAFT_JUDGE_TEMPERATURE", 0.2)
DEFAULT_MAX_TOKENS = 2048


class GatewayError(Exception):
    """Base class for all LLM-gateway failures."""


class ProviderUnavailable(GatewayError):
    """Transient failures persisted through the whole retry budget."""


class AuthError(GatewayError):
    """401/403 from the endpoint; never retried."""


class ContractError(GatewayError):
    """The provider responded but violated the completion contract
    (empty text after retries, playlist exhaustion, permanent 4xx)."""


class TransientProviderError(GatewayError):
    """Internal signal: this attempt failed but the call may be retried."""


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"invalid message role: {self.role!r}")
        if self.role in ("user", "assistant") and not self.content:
            raise ValueError(f"{self.role} message content must be nonempty")


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[ChatMessage, ...]
    temperature: float = CREATIVE_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    seed: Optional[int] = None
    role: str = ""  # pipeline role tag (writer/critic/judge/...), not sent over the wire

    def last_user_content(self) -> str:
        for message in reversed(self.messages):
            if message.role == "user":
                return message.content
        return ""


def chat_request(
    system: str,
    user: str,
    *,
    temperature: float = CREATIVE_TEMPERATURE,
    max_tokens: int = DEFAULT_MAX_TOKENS,
    seed: Optional[int] = None,
    role: str = "",
) -> ChatRequest:
    messages: list[ChatMessage] = []
    if system:
        messages.append(ChatMessage("system", system))
    messages.append(ChatMessage("user", user))
    return ChatRequest(tuple(messages), temperature, max_tokens, seed, role)


def request_key(request: ChatRequest) -> str:
    """Stable content hash of a request; the mock lookup table keys on it."""
    canonical = json.dumps(
        {
            "messages": [[m.role, m.content] for m in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
            "seed": request.seed,
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class TokenCounts:
    prompt: int = 0
    completion: int = 0


@dataclass(frozen=True)
class ChatExchange:
    """One provider attempt: the request, what came back, and bookkeeping."""

    request: ChatRequest
    response: str
    provider_tag: str
    latency_ms: float = 0.0
    token_counts: TokenCounts = TokenCounts()
    attempt: int = 1
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class ExchangeLog:
    """Append-only, thread-safe sink for every LLM attempt in a run."""

    def __init__(self):
        self._entries: list[ChatExchange] = []
        self._lock = threading.Lock()

    def append(self, exchange: ChatExchange) -> None:
        with self._lock:
            self._entries.append(exchange)

    def entries(self) -> list[ChatExchange]:
        with self._lock:
            return list(self._entries)

    def successes(self) -> list[ChatExchange]:
        return [e for e in self.entries() if e.ok]

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff_base: float = 0.5  # seconds; doubled per attempt, with jitter
    jitter: float = 0.25


@dataclass(frozen=True)
class ProviderConfig:
    kind: str = "mock"  # http_openai_compatible | mock
    endpoint: str = ""
    model: str = ""
    api_key: str = ""
    retry: RetryPolicy = RetryPolicy()
    timeout: float = 60.0

    def __post_init__(self):
        if self.kind not in ("http_openai_compatible", "mock"):
            raise ValueError(f"unknown provider kind: {self.kind!r}")
        if self.kind == "http_openai_compatible" and not self.endpoint:
            raise ValueError("http provider requires an endpoint")


def estimate_tokens(texts: Iterable[str]) -> int:
    return sum(len(t.split()) for t in texts)
