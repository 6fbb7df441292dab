"""Single chokepoint for LLM traffic: provider contract, retries,
structured-output extraction, and the deterministic mock provider."""

from .mock import MockProvider, load_playlist
from .parsing import (
    DecisionFields,
    DirectorFields,
    InputClass,
    MalformedDecisionError,
    MissingSectionError,
    ReplyStrategy,
    extract_director_fields,
    extract_structured_decision,
    extract_tagged_block,
    find_tagged_blocks,
    parse_id_list,
    parse_keyed_lines,
    require_strategy_coherence,
)
from .providers import (
    HttpOpenAiProvider,
    Provider,
    build_provider,
    complete,
    provider_config_from_env,
)
from .types import (
    CREATIVE_TEMPERATURE,
    JUDGE_TEMPERATURE,
    AuthError,
    ChatExchange,
    ChatMessage,
    ChatRequest,
    ContractError,
    ExchangeLog,
    GatewayError,
    ProviderConfig,
    ProviderUnavailable,
    RetryPolicy,
    TransientProviderError,
    chat_request,
    request_key,
)

__all__ = [
    "AuthError",
    "CREATIVE_TEMPERATURE",
    "ChatExchange",
    "ChatMessage",
    "ChatRequest",
    "ContractError",
    "DecisionFields",
    "DirectorFields",
    "ExchangeLog",
    "GatewayError",
    "HttpOpenAiProvider",
    "InputClass",
    "JUDGE_TEMPERATURE",
    "MalformedDecisionError",
    "MissingSectionError",
    "MockProvider",
    "Provider",
    "ProviderConfig",
    "ProviderUnavailable",
    "ReplyStrategy",
    "RetryPolicy",
    "TransientProviderError",
    "build_provider",
    "chat_request",
    "complete",
    "extract_director_fields",
    "extract_structured_decision",
    "extract_tagged_block",
    "find_tagged_blocks",
    "load_playlist",
    "parse_id_list",
    "parse_keyed_lines",
    "provider_config_from_env",
    "request_key",
    "require_strategy_coherence",
]
