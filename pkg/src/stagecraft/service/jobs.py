"""Asynchronous generation jobs: premise in, stored script out."""

from __future__ import annotations

import json
import logging
import threading
import uuid
from typing import Callable, Optional

from ..gateway import Provider
from ..generation import PipelineError, PremiseParagraph, run_pipeline, story_to_script
from ..script import script_to_json
from .store import DataStore

logger = logging.getLogger(__name__)

QUEUED = "queued"
RUNNING = "running"
DONE = "done"
FAILED = "failed"


class JobManager:
    """Runs generation jobs on worker threads and persists their state.

    Terminal job states (done/failed) are immutable; the state file is the
    source of truth so finished jobs survive restarts.
    """

    def __init__(self, store: DataStore, provider_factory: Callable[[], Provider]):
        self.store = store
        self.provider_factory = provider_factory
        self._threads: dict[str, threading.Thread] = {}
        self._lock = threading.Lock()

    def submit(self, premise: str, seed: int) -> dict:
        if not premise.strip():
            raise ValueError("premise must be nonempty")
        job_id = uuid.uuid4().hex[:12]
        state = {"job_id": job_id, "state": QUEUED, "premise": premise, "seed": seed}
        self.store.write_job(job_id, state)
        thread = threading.Thread(target=self._run, args=(job_id, premise, seed), daemon=True)
        with self._lock:
            self._threads[job_id] = thread
        thread.start()
        return state

    def get(self, job_id: str) -> Optional[dict]:
        return self.store.read_job(job_id)

    def wait(self, job_id: str, timeout: float = 30.0) -> Optional[dict]:
        thread = self._threads.get(job_id)
        if thread is not None:
            thread.join(timeout)
        return self.get(job_id)

    def _run(self, job_id: str, premise: str, seed: int) -> None:
        state = {"job_id": job_id, "state": RUNNING, "premise": premise, "seed": seed}
        self.store.write_job(job_id, state)
        provider = self.provider_factory()
        try:
            story, report = run_pipeline(PremiseParagraph(premise), seed, provider)
            script = story_to_script(story, provider, report)
        except PipelineError as exc:
            logger.warning("generation job %s failed: %s", job_id, exc)
            state.update({
                "state": FAILED,
                "error": str(exc),
                "report": exc.report.to_json() if exc.report else None,
            })
            self.store.write_job(job_id, state)
            return
        except Exception as exc:  # noqa: BLE001 - job boundary
            logger.exception("generation job %s crashed", job_id)
            state.update({"state": FAILED, "error": str(exc), "report": None})
            self.store.write_job(job_id, state)
            return

        script_id = self.store.save_script(script_to_json(script))
        report_path = self.store.jobs_dir / f"{job_id}.report.json"
        report_path.write_text(
            json.dumps(report.to_json(), ensure_ascii=False, indent=2), encoding="utf-8"
        )
        state.update({
            "state": DONE,
            "script_id": script_id,
            "report": report.to_json(),
            "warnings": report.warnings,
        })
        self.store.write_job(job_id, state)
