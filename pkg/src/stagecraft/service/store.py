"""File-backed persistence: script documents, append-only session event
logs, and generation-job state files.

Sessions are event-sourced: the log's first line records the session's
creation parameters and every following line is one committed turn record.
Replaying the log through `Session.apply_record` reconstructs the exact
state, which is what makes crash-resume a non-event.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

from ..runtime import (
    Architecture,
    ArchitectureConfig,
    Session,
    TurnRecord,
    record_from_json,
    record_to_json,
)
from ..script import DramaScript, SchemaError, script_from_json


class UnknownScriptError(KeyError):
    pass


class UnknownSessionError(KeyError):
    pass


@dataclass(frozen=True)
class SessionMeta:
    session_id: str
    script_id: str
    architecture: Architecture
    reflection_period: Optional[int]
    reflection_budget: int


class DataStore:
    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.scripts_dir = self.data_dir / "scripts"
        self.sessions_dir = self.data_dir / "sessions"
        self.jobs_dir = self.data_dir / "jobs"
        for directory in (self.scripts_dir, self.sessions_dir, self.jobs_dir):
            directory.mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()

    # ------------------------------------------------------------------
    # scripts

    def save_script(self, document: dict) -> str:
        script_from_json(document)  # validate before persisting
        text = json.dumps(document, ensure_ascii=False, indent=2, sort_keys=True)
        script_id = hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
        path = self.scripts_dir / f"{script_id}.json"
        if not path.exists():
            path.write_text(text + "\n", encoding="utf-8")
        return script_id

    def script_document(self, script_id: str) -> dict:
        path = self.scripts_dir / f"{script_id}.json"
        if not path.exists():
            raise UnknownScriptError(script_id)
        return json.loads(path.read_text(encoding="utf-8"))

    def load_script(self, script_id: str) -> DramaScript:
        return script_from_json(self.script_document(script_id))

    def list_scripts(self) -> list[str]:
        return sorted(p.stem for p in self.scripts_dir.glob("*.json"))

    # ------------------------------------------------------------------
    # sessions (append-only JSON-lines event logs)

    def _session_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.jsonl"

    def create_session(
        self,
        script_id: str,
        architecture: Architecture,
        reflection_period: Optional[int],
        reflection_budget: int,
    ) -> SessionMeta:
        if not (self.scripts_dir / f"{script_id}.json").exists():
            raise UnknownScriptError(script_id)
        meta = SessionMeta(
            session_id=uuid.uuid4().hex[:12],
            script_id=script_id,
            architecture=architecture,
            reflection_period=reflection_period,
            reflection_budget=reflection_budget,
        )
        header = {
            "type": "created",
            "session_id": meta.session_id,
            "script_id": meta.script_id,
            "architecture": meta.architecture.value,
            "reflection_period": meta.reflection_period,
            "reflection_budget": meta.reflection_budget,
        }
        self._append_line(meta.session_id, header)
        return meta

    def _append_line(self, session_id: str, payload: dict) -> None:
        line = json.dumps(payload, ensure_ascii=False)
        with self._write_lock:
            with open(self._session_path(session_id), "a", encoding="utf-8") as handle:
                handle.write(line + "\n")
                handle.flush()
                os.fsync(handle.fileno())

    def append_turn(self, session_id: str, record: TurnRecord) -> None:
        payload = {"type": "turn", **record_to_json(record)}
        self._append_line(session_id, payload)

    def read_events(self, session_id: str) -> Iterator[dict]:
        path = self._session_path(session_id)
        if not path.exists():
            raise UnknownSessionError(session_id)
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    yield json.loads(line)

    def list_sessions(self) -> list[str]:
        return sorted(p.stem for p in self.sessions_dir.glob("*.jsonl"))

    def load_session(self, session_id: str) -> tuple[Session, SessionMeta]:
        """Rebuild a session by replaying its event log."""
        events = self.read_events(session_id)
        try:
            header = next(events)
        except StopIteration:
            raise UnknownSessionError(session_id) from None
        if header.get("type") != "created":
            raise SchemaError(f"session log {session_id} does not start with a created event")
        meta = SessionMeta(
            session_id=session_id,
            script_id=header["script_id"],
            architecture=Architecture(header["architecture"]),
            reflection_period=header.get("reflection_period"),
            reflection_budget=header.get("reflection_budget", 1),
        )
        script = self.load_script(meta.script_id)
        session = Session(
            script=script,
            config=ArchitectureConfig(
                kind=meta.architecture,
                reflection_period=meta.reflection_period,
                reflection_budget=meta.reflection_budget,
            ),
            session_id=session_id,
        )
        for event in events:
            if event.get("type") == "turn":
                session.apply_record(record_from_json(event))
        return session, meta

    # ------------------------------------------------------------------
    # generation jobs

    def job_path(self, job_id: str) -> Path:
        return self.jobs_dir / f"{job_id}.json"

    def write_job(self, job_id: str, payload: dict) -> None:
        path = self.job_path(job_id)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload, ensure_ascii=False, indent=2), encoding="utf-8")
        tmp.replace(path)

    def read_job(self, job_id: str) -> Optional[dict]:
        path = self.job_path(job_id)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))
