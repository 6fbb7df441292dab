"""HTTP facade: scripts, live sessions, and generation jobs.

State is event-sourced to per-session JSON-lines logs; the in-memory
session cache is just an optimization and can be rebuilt from disk at any
moment (which is exactly what happens after a crash or restart).
"""

from __future__ import annotations

import json
import logging
import threading
import time
from typing import Callable, Iterator, Optional

from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse
from pydantic import BaseModel, Field

from ..gateway import Provider, ProviderConfig, build_provider, load_playlist
from ..runtime import (
    Architecture,
    ArchitectureConfig,
    Session,
    SessionFinishedError,
    SessionStatus,
    TurnFailedError,
    predicted_session_calls,
    record_to_json,
    reflection_to_json,
    scene_header,
    step,
)
from ..runtime.events import decision_to_json, header_to_json
from ..script import SchemaError, ScriptSyntaxError
from ..simulation import offline_stub
from .config import ServiceConfig
from .jobs import JobManager
from .store import DataStore, SessionMeta, UnknownScriptError, UnknownSessionError

logger = logging.getLogger(__name__)


class CreateSessionBody(BaseModel):
    script_id: str
    architecture: str = Architecture.HYBRID.value
    reflection_period: Optional[int] = Field(default=None)
    reflection_budget: Optional[int] = Field(default=None)


class MessageBody(BaseModel):
    text: str = ""
    # Client-supplied token: re-posting the same token replays the cached
    # response instead of running a second turn (retry-after-network-failure
    # protection for the web player).
    client_token: Optional[str] = None


class GenerateBody(BaseModel):
    premise: str
    seed: int = 0


def default_provider_factory(config: ServiceConfig) -> Callable[[], Provider]:
    if config.provider == "mock":
        if config.mock_playlist is None:
            raise ValueError("provider = mock requires mock_playlist")
        playlist_path = config.mock_playlist
        return lambda: load_playlist(playlist_path)
    if config.provider == "http":
        provider_config = ProviderConfig(
            kind="http_openai_compatible",
            endpoint=config.endpoint,
            model=config.model,
            api_key=config.api_key,
        )
        return lambda: build_provider(provider_config)
    return lambda: offline_stub()


class SessionHost:
    """Per-session mutual exclusion plus lazy load from the event log."""

    def __init__(self, store: DataStore, provider_factory: Callable[[], Provider]):
        self.store = store
        self.provider_factory = provider_factory
        self._sessions: dict[str, Session] = {}
        self._providers: dict[str, Provider] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._turn_cache: dict[str, tuple[str, dict]] = {}  # session id -> (token, response)
        self._registry_lock = threading.Lock()

    def cached_turn(self, session_id: str, token: Optional[str]) -> Optional[dict]:
        if not token:
            return None
        cached = self._turn_cache.get(session_id)
        if cached is not None and cached[0] == token:
            return cached[1]
        return None

    def cache_turn(self, session_id: str, token: Optional[str], response: dict) -> None:
        if token:
            self._turn_cache[session_id] = (token, response)

    def lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            if session_id not in self._locks:
                self._locks[session_id] = threading.Lock()
            return self._locks[session_id]

    def session(self, session_id: str) -> Session:
        with self._registry_lock:
            cached = self._sessions.get(session_id)
        if cached is not None:
            return cached
        session, _meta = self.store.load_session(session_id)
        with self._registry_lock:
            self._sessions.setdefault(session_id, session)
            return self._sessions[session_id]

    def provider(self, session_id: str) -> Provider:
        with self._registry_lock:
            if session_id not in self._providers:
                self._providers[session_id] = self.provider_factory()
            return self._providers[session_id]

    def register(self, meta: SessionMeta, session: Session) -> None:
        with self._registry_lock:
            self._sessions[meta.session_id] = session

    def forget(self, session_id: str) -> None:
        with self._registry_lock:
            self._sessions.pop(session_id, None)
            self._providers.pop(session_id, None)


def create_app(
    config: Optional[ServiceConfig] = None,
    provider_factory: Optional[Callable[[], Provider]] = None,
) -> FastAPI:
    config = config or ServiceConfig()
    provider_factory = provider_factory or default_provider_factory(config)

    store = DataStore(config.data_dir)
    host = SessionHost(store, provider_factory)
    jobs = JobManager(store, provider_factory)

    app = FastAPI(title="stagecraft", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store
    app.state.host = host
    app.state.jobs = jobs
    app.state.config = config

    def require_auth(request: Request) -> None:
        if not config.auth_token:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {config.auth_token}":
            raise HTTPException(status_code=401, detail="missing or invalid bearer token")

    auth = Depends(require_auth)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "scripts": len(store.list_scripts())}

    # ------------------------------------------------------------------
    # scripts

    @app.post("/scripts", dependencies=[auth])
    def upload_script(document: dict) -> dict:
        try:
            script_id = store.save_script(document)
        except (SchemaError, ScriptSyntaxError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {"id": script_id}

    @app.get("/scripts/{script_id}", dependencies=[auth])
    def get_script(script_id: str) -> dict:
        try:
            return store.script_document(script_id)
        except UnknownScriptError as exc:
            raise HTTPException(status_code=404, detail=f"unknown script {script_id!r}") from exc

    # ------------------------------------------------------------------
    # sessions

    @app.post("/sessions", dependencies=[auth])
    def create_session(body: CreateSessionBody) -> dict:
        try:
            architecture = Architecture(body.architecture)
        except ValueError as exc:
            raise HTTPException(
                status_code=400, detail=f"unknown architecture {body.architecture!r}"
            ) from exc
        period = (
            body.reflection_period
            if body.reflection_period is not None
            else config.reflection_period
        )
        budget = (
            body.reflection_budget
            if body.reflection_budget is not None
            else config.reflection_budget
        )
        try:
            meta = store.create_session(body.script_id, architecture, period, budget)
            script = store.load_script(body.script_id)
        except UnknownScriptError as exc:
            raise HTTPException(status_code=404, detail=f"unknown script {body.script_id!r}") from exc
        except (SchemaError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        session = Session(
            script=script,
            config=ArchitectureConfig(
                kind=architecture, reflection_period=period, reflection_budget=budget
            ),
            session_id=meta.session_id,
        )
        host.register(meta, session)
        return {
            "session_id": meta.session_id,
            "script_id": meta.script_id,
            "architecture": architecture.value,
            "reflection_period": period,
            "scene": header_to_json(scene_header(session.scene)),
            "title": script.title,
        }

    def _load(session_id: str) -> Session:
        try:
            return host.session(session_id)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}") from exc

    def _script_id_of(session_id: str) -> str:
        for event in store.read_events(session_id):
            if event.get("type") == "created":
                return event.get("script_id", "")
        return ""

    @app.post("/sessions/{session_id}/message", dependencies=[auth])
    def post_message(session_id: str, body: MessageBody) -> dict:
        session = _load(session_id)
        with host.lock(session_id):
            replay = host.cached_turn(session_id, body.client_token)
            if replay is not None:
                return replay
            if session.status is SessionStatus.FINISHED:
                raise HTTPException(status_code=409, detail="session is finished")
            provider = host.provider(session_id)
            try:
                result = step(session, body.text, provider)
            except SessionFinishedError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            except TurnFailedError as exc:
                raise HTTPException(
                    status_code=502,
                    detail={"error": str(exc), "replayable": True},
                ) from exc
            store.append_turn(session_id, result.record)
            response = {
                "turn": result.turn,
                "decisions": [decision_to_json(result.decision)],
                "scene_header": header_to_json(result.transition),
                "finished": result.finished,
                "status": session.status.value,
                "reflection": (
                    None if result.reflection is None else reflection_to_json(result.reflection)
                ),
                "warnings": list(result.warnings),
            }
            host.cache_turn(session_id, body.client_token, response)
        return response

    @app.get("/sessions/{session_id}/transcript", dependencies=[auth])
    def transcript(session_id: str) -> dict:
        session = _load(session_id)
        with host.lock(session_id):
            return {
                "session_id": session_id,
                "script_id": _script_id_of(session_id),
                "status": session.status.value,
                "turn": session.turn,
                "architecture": session.config.kind.value,
                "title": session.script.title,
                "scene": header_to_json(scene_header(session.scene)),
                "opening_scene": header_to_json(scene_header(session.script.scenes[0])),
                "entries": [
                    {
                        "turn": e.turn,
                        "speaker": e.speaker,
                        "addressee": e.addressee,
                        "utterance": e.utterance,
                        "scene_index": e.scene_index,
                    }
                    for e in session.memory
                ],
                "records": [record_to_json(r) for r in session.records],
                "ledger": dict(session.ledger),
                "ledger_total": session.ledger_total(),
                "predicted_calls": predicted_session_calls(session),
            }

    @app.get("/sessions/{session_id}/plots", dependencies=[auth])
    def plots(session_id: str) -> dict:
        session = _load(session_id)
        with host.lock(session_id):
            return {
                "session_id": session_id,
                "status": session.status.value,
                "scene_index": session.scene.index,
                "plots": [
                    {
                        "id": p.id,
                        "description": p.description,
                        "completed": p.completed,
                        "owner": p.owner,
                        "origin": p.origin.value,
                    }
                    for p in session.chain
                ],
                "reflections": [reflection_to_json(r) for r in session.reflections()],
            }

    @app.get("/sessions/{session_id}/stream", dependencies=[auth])
    def stream(session_id: str, follow: bool = False, timeout: float = 30.0) -> StreamingResponse:
        _load(session_id)  # 404 before we start streaming

        def event_stream() -> Iterator[str]:
            seen = 0
            deadline = time.monotonic() + timeout
            while True:
                events = list(store.read_events(session_id))
                for event in events[seen:]:
                    yield f"event: {event.get('type', 'event')}\n"
                    yield f"data: {json.dumps(event, ensure_ascii=False)}\n\n"
                seen = len(events)
                if not follow:
                    break
                if any(e.get("finished") for e in events if e.get("type") == "turn"):
                    break
                if time.monotonic() > deadline:
                    break
                time.sleep(0.2)

        return StreamingResponse(event_stream(), media_type="text/event-stream")

    # ------------------------------------------------------------------
    # generation

    @app.post("/generate", dependencies=[auth])
    def generate(body: GenerateBody) -> dict:
        try:
            return jobs.submit(body.premise, body.seed)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.get("/generate/{job_id}", dependencies=[auth])
    def job_state(job_id: str) -> dict:
        state = jobs.get(job_id)
        if state is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")
        return state

    return app
