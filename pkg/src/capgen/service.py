"""HTTP front end: submit a description, poll for the generated ontology.

POST /capabilities queues a pipeline run and answers 202 with a job id;
GET /capabilities/{id} reports the job state and, once done, the result.
Runs execute on a bounded thread pool so handlers never wait on the model.
"""

from __future__ import annotations

import argparse
import contextlib
import enum
import logging
import os
import sys
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import PipelineConfig, ServiceSettings, load_config
from .errors import ConfigError
from .llm import Provider, ProviderKind, open_provider
from .pipeline import PipelineResult, run

API_SCHEMA_VERSION = "1"

log = logging.getLogger(__name__)


class JobState(str, enum.Enum):
    QUEUED = "Queued"
    RUNNING = "Running"
    DONE = "Done"
    FAILED = "Failed"


_NEXT_STATES = {
    JobState.QUEUED: {JobState.RUNNING, JobState.FAILED},
    JobState.RUNNING: {JobState.DONE, JobState.FAILED},
    JobState.DONE: set(),
    JobState.FAILED: set(),
}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


@dataclass
class JobRecord:
    id: str
    description: str
    config: PipelineConfig
    state: JobState = JobState.QUEUED
    created_at: str = field(default_factory=_now)
    finished_at: Optional[str] = None
    result: Optional[PipelineResult] = None
    error: Optional[str] = None
    finished_mono: Optional[float] = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "schema_version": API_SCHEMA_VERSION,
            "job_id": self.id,
            "state": self.state.value,
            "created_at": self.created_at,
            "finished_at": self.finished_at,
        }
        if self.result is not None:
            out["result"] = self.result.to_dict()
        if self.error is not None:
            out["error"] = self.error
        return out


class JobStore:
    """In-memory jobs with TTL eviction of finished ones. Thread-safe."""

    def __init__(self, capacity: int, ttl_seconds: float, clock: Callable[[], float] = time.monotonic):
        self.capacity = capacity
        self.ttl = ttl_seconds
        self.clock = clock
        self._jobs: dict[str, JobRecord] = {}
        self._lock = threading.Lock()

    def _evict(self) -> None:
        now = self.clock()
        stale = [
            k for k, j in self._jobs.items()
            if j.finished_mono is not None and now - j.finished_mono > self.ttl
        ]
        for k in stale:
            del self._jobs[k]

    def add(self, description: str, config: PipelineConfig) -> Optional[JobRecord]:
        """Register a new job, or return None when the queue is full."""
        with self._lock:
            self._evict()
            active = sum(j.state in (JobState.QUEUED, JobState.RUNNING) for j in self._jobs.values())
            if active >= self.capacity:
                return None
            job = JobRecord(str(uuid.uuid4()), description, config)
            self._jobs[job.id] = job
            return job

    def get(self, job_id: str) -> Optional[dict[str, Any]]:
        # snapshot under the lock so readers never see a half-updated record
        with self._lock:
            self._evict()
            job = self._jobs.get(job_id)
            return None if job is None else job.to_dict()

    def transition(self, job_id: str, state: JobState, **updates: Any) -> None:
        with self._lock:
            job = self._jobs[job_id]
            if state not in _NEXT_STATES[job.state]:
                raise RuntimeError(f"job {job_id}: bad transition {job.state.value} -> {state.value}")
            job.state = state
            for k, v in updates.items():
                setattr(job, k, v)
            if state in (JobState.DONE, JobState.FAILED):
                job.finished_at = _now()
                job.finished_mono = self.clock()


class CapabilityOptions(BaseModel):
    model: Optional[str] = None
    max_repeat_per_step: Optional[int] = Field(default=None, ge=0)


class GenerateRequest(BaseModel):
    description: str
    options: Optional[CapabilityOptions] = None


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse({"schema_version": API_SCHEMA_VERSION, "error": message}, status_code=status)


def _credentials_missing(config: PipelineConfig) -> Optional[str]:
    p = config.provider
    if p.kind is ProviderKind.REPLAY:
        return None
    if not os.environ.get(p.api_key_env or ""):
        return f"provider credentials missing: environment variable {p.api_key_env} is not set"
    return None


def create_app(
    config: PipelineConfig,
    settings: ServiceSettings = ServiceSettings(),
    provider_factory: Optional[Callable[[PipelineConfig], Provider]] = None,
) -> FastAPI:
    """Build the application. Config files are loaded here, before serving."""
    config.check()
    factory = provider_factory or (lambda c: open_provider(c.provider))
    store = JobStore(settings.queue_capacity, settings.job_ttl_seconds)
    executor = ThreadPoolExecutor(max_workers=settings.workers, thread_name_prefix="capgen-job")

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        executor.shutdown(wait=False, cancel_futures=True)

    app = FastAPI(title="capgen", version=API_SCHEMA_VERSION, lifespan=lifespan)
    app.state.store = store
    app.state.executor = executor

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request: Request, exc: RequestValidationError) -> JSONResponse:
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(x) for x in first.get("loc", ()) if x != "body")
        return _error(400, f"invalid request: {where} {first.get('msg', '')}".strip())

    def execute(job_id: str, description: str, job_config: PipelineConfig) -> None:
        store.transition(job_id, JobState.RUNNING)
        try:
            result = run(job_config, description, provider=factory(job_config))
        except Exception as exc:  # keep the worker alive; the job records why
            log.exception("job %s failed", job_id)
            store.transition(job_id, JobState.FAILED, error=f"{type(exc).__name__}: {exc}")
        else:
            store.transition(job_id, JobState.DONE, result=result)

    @app.post("/capabilities", status_code=202)
    async def post_capabilities(body: GenerateRequest, request: Request):
        if not body.description.strip():
            return _error(400, "description must not be empty")
        opts = body.options or CapabilityOptions()
        if opts.max_repeat_per_step is not None and opts.max_repeat_per_step > settings.max_repeat_limit:
            return _error(400, f"max_repeat_per_step may be at most {settings.max_repeat_limit}")
        if opts.model is not None and opts.model != config.provider.model:
            if opts.model not in settings.allowed_models:
                return _error(400, f"model {opts.model!r} is not allowed on this server")
        job_config = config.with_overrides(model=opts.model, max_repeat=opts.max_repeat_per_step)
        missing = _credentials_missing(job_config)
        if missing:
            return _error(503, missing)
        job = store.add(body.description, job_config)
        if job is None:
            return _error(503, "job queue is full, try again later")
        executor.submit(execute, job.id, body.description, job_config)
        return {
            "schema_version": API_SCHEMA_VERSION,
            "job_id": job.id,
            "state": JobState.QUEUED.value,
            "status_url": str(request.url_for("get_job", job_id=job.id)),
        }

    @app.get("/capabilities/{job_id}", name="get_job")
    async def get_job(job_id: str):
        record = store.get(job_id)
        if record is None:
            return _error(404, f"unknown job id {job_id}")
        return record

    @app.get("/healthz")
    async def healthz():
        return {"schema_version": API_SCHEMA_VERSION, "status": "ok"}

    return app


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="capgen-serve", description="Serve the capability REST API.")
    parser.add_argument("--config", metavar="FILE", help="TOML config file")
    parser.add_argument("--host", help="bind address (overrides [service] host)")
    parser.add_argument("--port", type=int, help="port (overrides [service] port)")
    args = parser.parse_args(argv)
    try:
        if args.config:
            config, settings = load_config(args.config)
        else:
            config, settings = PipelineConfig(), ServiceSettings()
        app = create_app(config, settings)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    import uvicorn

    uvicorn.run(app, host=args.host or settings.host, port=args.port or settings.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
