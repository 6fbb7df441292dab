"""Provider implementations: the retry loop, the HTTP client, and wiring.

All LLM traffic in the engine flows through ``Provider.complete``.  No other
module constructs network requests.
"""

from __future__ import annotations

import logging
import os
import random
import time
from typing import Callable, Optional

import httpx

from .types import (
    AuthError,
    ChatExchange,
    ChatRequest,
    ContractError,
    ExchangeLog,
    ProviderConfig,
    ProviderUnavailable,
    RetryPolicy,
    TokenCounts,
    TransientProviderError,
    estimate_tokens,
)

logger = logging.getLogger(__name__)

ENV_API_KEY = "STAGECRAFT_API_KEY"
ENV_ENDPOINT = "STAGECRAFT_ENDPOINT"
ENV_MODEL = "STAGECRAFT_MODEL"


class Provider:
    """Base provider: retry with exponential backoff + jitter around a
    single-attempt hook, logging every attempt to the exchange log.
    """

    tag = "provider"

    def __init__(
        self,
        retry: RetryPolicy = RetryPolicy(),
        log: Optional[ExchangeLog] = None,
        sleep: Callable[[float], None] = time.sleep,
        rng: Optional[random.Random] = None,
    ):
        self.retry = retry
        self.log = log if log is not None else ExchangeLog()
        self._sleep = sleep
        self._rng = rng or random.Random()

    def _attempt(self, request: ChatRequest) -> str:
        raise NotImplementedError

    def _backoff(self, attempt: int) -> float:
        base = self.retry.backoff_base * (2 ** (attempt - 1))
        return base * (1.0 + self.retry.jitter * self._rng.random())

    def complete(self, request: ChatRequest) -> ChatExchange:
        """Run one logical completion.  Transient failures (429/5xx/timeout,
        empty text) are retried per policy; auth failures never are.  The
        loop exits on the first success, so a logical request can never
        produce more than one successful attempt.
        """
        last_error: Optional[Exception] = None
        for attempt in range(1, self.retry.max_attempts + 1):
            started = time.perf_counter()
            try:
                text = self._attempt(request)
                if not text or not text.strip():
                    raise TransientProviderError("empty completion")
            except AuthError as exc:
                self._log_attempt(request, "", attempt, started, str(exc))
                raise
            except TransientProviderError as exc:
                last_error = exc
                self._log_attempt(request, "", attempt, started, str(exc))
                if attempt < self.retry.max_attempts:
                    self._sleep(self._backoff(attempt))
                continue
            exchange = self._log_attempt(request, text, attempt, started, None)
            return exchange

        if last_error is not None and "empty completion" in str(last_error):
            raise ContractError(f"empty completion after {self.retry.max_attempts} attempts")
        raise ProviderUnavailable(
            f"provider failed after {self.retry.max_attempts} attempts: {last_error}"
        )

    def _log_attempt(
        self, request: ChatRequest, text: str, attempt: int, started: float, error: Optional[str]
    ) -> ChatExchange:
        exchange = ChatExchange(
            request=request,
            response=text,
            provider_tag=self.tag,
            latency_ms=(time.perf_counter() - started) * 1000.0,
            token_counts=TokenCounts(
                prompt=estimate_tokens(m.content for m in request.messages),
                completion=estimate_tokens([text]) if text else 0,
            ),
            attempt=attempt,
            error=error,
        )
        self.log.append(exchange)
        return exchange


class HttpOpenAiProvider(Provider):
    """OpenAI-compatible ``POST {endpoint}/v1/chat/completions`` client."""

    def __init__(self, config: ProviderConfig, transport: Optional[httpx.BaseTransport] = None,
                 **kwargs):
        super().__init__(retry=config.retry, **kwargs)
        self.config = config
        self.tag = config.model or "http"
        self._client = httpx.Client(timeout=config.timeout, transport=transport)

    def _attempt(self, request: ChatRequest) -> str:
        url = self.config.endpoint.rstrip("/") + "/v1/chat/completions"
        payload = {
            "model": self.config.model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        if request.seed is not None:
            payload["seed"] = request.seed
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"

        try:
            response = self._client.post(url, json=payload, headers=headers)
        except (httpx.TimeoutException, httpx.TransportError) as exc:
            raise TransientProviderError(f"transport failure: {exc}") from exc

        if response.status_code in (401, 403):
            raise AuthError(f"authentication rejected ({response.status_code})")
        if response.status_code == 429 or response.status_code >= 500:
            raise TransientProviderError(f"HTTP {response.status_code}")
        if response.status_code >= 400:
            raise ContractError(f"HTTP {response.status_code}: {response.text[:200]}")

        try:
            body = response.json()
            return body["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise TransientProviderError(f"malformed completion body: {exc}") from exc


def provider_config_from_env(env: Optional[dict] = None) -> ProviderConfig:
    env = os.environ if env is None else env
    return ProviderConfig(
        kind="http_openai_compatible",
        endpoint=env.get(ENV_ENDPOINT, ""),
        model=env.get(ENV_MODEL, ""),
        api_key=env.get(ENV_API_KEY, ""),
    )


def build_provider(config: ProviderConfig, log: Optional[ExchangeLog] = None) -> Provider:
    if config.kind == "http_openai_compatible":
        return HttpOpenAiProvider(config, log=log)
    from .mock import MockProvider

    return MockProvider(log=log, retry=config.retry)


def complete(provider: Provider, request: ChatRequest) -> ChatExchange:
    """Module-level convenience wrapper around ``provider.complete``."""
    return provider.complete(request)
