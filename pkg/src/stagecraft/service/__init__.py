"""HTTP facade and file-backed persistence for sessions and jobs."""

from .app import create_app, default_provider_factory
from .config import ServiceConfig, load_config, parse_config_text
from .jobs import DONE, FAILED, QUEUED, RUNNING, JobManager
from .store import (
    DataStore,
    SessionMeta,
    UnknownScriptError,
    UnknownSessionError,
)

__all__ = [
    "DONE",
    "DataStore",
    "FAILED",
    "JobManager",
    "QUEUED",
    "RUNNING",
    "ServiceConfig",
    "SessionMeta",
    "UnknownScriptError",
    "UnknownSessionError",
    "create_app",
    "default_provider_factory",
    "load_config",
    "parse_config_text",
]
