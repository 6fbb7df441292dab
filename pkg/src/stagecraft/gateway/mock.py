"""Deterministic mock provider.

Three modes, matching what the test suites need:

* playlist -- a fixed sequence of canned responses, one entry consumed per
  attempt; entries may inject failures.
* lookup   -- a table keyed by ``request_key(request)``.
* stub     -- a callable ``f(request) -> str`` for programmable behavior.

With a fixed playlist (or a pure stub) every downstream pipeline is
bit-deterministic: the mock reports zero latency and never touches a clock.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

from .types import (
    AuthError,
    ChatExchange,
    ChatRequest,
    ContractError,
    ExchangeLog,
    RetryPolicy,
    TokenCounts,
    TransientProviderError,
    estimate_tokens,
    request_key,
)
from .providers import Provider

PlaylistEntry = Union[str, dict]

_FAILURES = {
    "429": TransientProviderError,
    "500": TransientProviderError,
    "timeout": TransientProviderError,
    "auth": AuthError,
}


class MockProvider(Provider):
    tag = "mock"

    def __init__(
        self,
        playlist: Optional[Sequence[PlaylistEntry]] = None,
        lookup: Optional[dict[str, str]] = None,
        stub: Optional[Callable[[ChatRequest], str]] = None,
        retry: RetryPolicy = RetryPolicy(backoff_base=0.0, jitter=0.0),
        log: Optional[ExchangeLog] = None,
    ):
        super().__init__(retry=retry, log=log, sleep=lambda _s: None)
        modes = sum(x is not None for x in (playlist, lookup, stub))
        if modes > 1:
            raise ValueError("configure exactly one of playlist / lookup / stub")
        self._playlist = list(playlist) if playlist is not None else None
        self._lookup = lookup
        self._stub = stub
        self._cursor = 0
        self.calls: list[ChatRequest] = []

    @property
    def call_count(self) -> int:
        """Number of attempts made (retries included)."""
        return len(self.calls)

    def _attempt(self, request: ChatRequest) -> str:
        self.calls.append(request)
        if self._stub is not None:
            return self._stub(request)
        if self._lookup is not None:
            key = request_key(request)
            if key not in self._lookup:
                raise ContractError(f"mock lookup table has no entry for request {key[:12]}...")
            return self._lookup[key]
        if self._playlist is None:
            raise ContractError("mock provider configured with no responses")
        if self._cursor >= len(self._playlist):
            raise ContractError(
                f"mock playlist exhausted after {len(self._playlist)} entries "
                f"(role={request.role or '?'})"
            )
        entry = self._playlist[self._cursor]
        self._cursor += 1
        if isinstance(entry, dict):
            kind = entry.get("error", "")
            if kind == "empty":
                return ""
            exc = _FAILURES.get(kind)
            if exc is None:
                raise ContractError(f"unknown mock failure kind: {kind!r}")
            raise exc(f"scripted failure: {kind}")
        return entry

    # Mock attempts report zero latency so goldens stay byte-stable.
    def _log_attempt(self, request, text, attempt, started, error):
        exchange = ChatExchange(
            request=request,
            response=text,
            provider_tag=self.tag,
            latency_ms=0.0,
            token_counts=TokenCounts(
                prompt=estimate_tokens(m.content for m in request.messages),
                completion=estimate_tokens([text]) if text else 0,
            ),
            attempt=attempt,
            error=error,
        )
        self.log.append(exchange)
        return exchange


def load_playlist(path: Union[str, Path]) -> MockProvider:
    """Build a playlist mock from a JSON file: ``{"responses": [...]}``."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(data, list):
        responses = data
    else:
        responses = data["responses"]
    return MockProvider(playlist=responses)
