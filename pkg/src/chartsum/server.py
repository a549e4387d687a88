"""Job-oriented HTTP API around the pipeline, with file persistence.

Jobs are asynchronous: submission returns an id immediately, execution runs
on a bounded worker pool, and clients poll for status. Every job lives in
its own directory (inputs, state, result, transcript, chat versions), so a
restart recovers all completed work.

Endpoints: POST /jobs, GET /jobs/{id}, GET /jobs/{id}/summary,
GET /jobs/{id}/transcript, POST /jobs/{id}/chat, POST /evaluate.
Environment: CI_DATA_DIR, CI_WORKERS, plus the backend variables.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .agents import PipelineConfig, Transcript, chat_refine, run_pipeline
from .backend import backend_from_env
from .bench import format_stats, corpus_stats, load_corpus, run_eval
from .errors import ChartsumError
from .ingest import load_chart
from .metrics import format_report
from .patches import uni_insight
from .sumdoc import SummaryDoc, deserialize, serialize

QUEUED, RUNNING, DONE, FAILED = "queued", "running", "done", "failed"


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)


@dataclass
class Job:
    id: str
    state: str = QUEUED
    stage: str = ""
    created: float = field(default_factory=time.time)
    updated: float = field(default_factory=time.time)
    error: str = ""
    chat_versions: int = 0
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        state = f"{RUNNING}:{self.stage}" if self.state == RUNNING and self.stage else self.state
        return {
            "id": self.id,
            "state": state,
            "created": self.created,
            "updated": self.updated,
            "error": self.error,
            "chat_versions": self.chat_versions,
            "config": self.config,
        }


class JobStore:
    """One directory per job; atomic state writes; single-writer per job."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _dir(self, job_id: str) -> Path:
        return self.root / job_id

    def create(self, spec_text: str, data_csv: str | None, config: dict) -> Job:
        job = Job(id=uuid.uuid4().hex[:12], config=config)
        d = self._dir(job.id)
        d.mkdir(parents=True)
        (d / "spec.json").write_text(spec_text, encoding="utf-8")
        if data_csv is not None:
            (d / "data.csv").write_text(data_csv, encoding="utf-8")
        self.save(job)
        return job

    def save(self, job: Job) -> None:
        job.updated = time.time()
        with self._lock:
            _atomic_write(
                self._dir(job.id) / "job.json",
                json.dumps(
                    {
                        "id": job.id,
                        "state": job.state,
                        "stage": job.stage,
                        "created": job.created,
                        "updated": job.updated,
                        "error": job.error,
                        "chat_versions": job.chat_versions,
                        "config": job.config,
                    },
                    sort_keys=True,
                ).encode("utf-8"),
            )

    def load(self, job_id: str) -> Job:
        path = self._dir(job_id) / "job.json"
        if not path.exists():
            raise KeyError(job_id)
        raw = json.loads(path.read_text(encoding="utf-8"))
        return Job(
            id=raw["id"],
            state=raw["state"],
            stage=raw.get("stage", ""),
            created=raw["created"],
            updated=raw["updated"],
            error=raw.get("error", ""),
            chat_versions=raw.get("chat_versions", 0),
            config=raw.get("config", {}),
        )

    def inputs(self, job_id: str) -> tuple[str, bytes | None]:
        d = self._dir(job_id)
        spec_text = (d / "spec.json").read_text(encoding="utf-8")
        data_path = d / "data.csv"
        return spec_text, data_path.read_bytes() if data_path.exists() else None

    def save_result(self, job_id: str, doc: SummaryDoc, transcript: Transcript) -> None:
        d = self._dir(job_id)
        _atomic_write(d / "result.summary.json", serialize(doc))
        _atomic_write(
            d / "transcript.json",
            json.dumps(transcript.to_dict(), indent=2).encode("utf-8"),
        )
        (d / "transcript.log").write_text(transcript.to_text(), encoding="utf-8")

    def latest_summary(self, job_id: str) -> SummaryDoc:
        d = self._dir(job_id)
        versions = sorted((d / "chat").glob("*.summary.json")) if (d / "chat").is_dir() else []
        path = versions[-1] if versions else d / "result.summary.json"
        if not path.exists():
            raise FileNotFoundError(path)
        return deserialize(path.read_bytes())

    def append_chat_version(self, job_id: str, doc: SummaryDoc) -> int:
        d = self._dir(job_id) / "chat"
        d.mkdir(exist_ok=True)
        version = len(list(d.glob("*.summary.json"))) + 1
        _atomic_write(d / f"{version:03d}.summary.json", serialize(doc))
        return version

    def transcript_dict(self, job_id: str) -> dict:
        path = self._dir(job_id) / "transcript.json"
        if not path.exists():
            return {"events": []}
        return json.loads(path.read_text(encoding="utf-8"))

    def all_ids(self) -> list[str]:
        return sorted(p.name for p in self.root.iterdir() if (p / "job.json").exists())


def _pipeline_config(overrides: dict) -> PipelineConfig:
    kwargs = {}
    for key in ("seed", "vote_candidates", "max_refine_iters"):
        if key in overrides:
            kwargs[key] = int(overrides[key])
    return PipelineConfig(**kwargs)


class SubmitBody(BaseModel):
    spec: str | dict
    data_csv: str | None = None
    config: dict = {}


class ChatBody(BaseModel):
    message: str


class EvaluateBody(BaseModel):
    corpus_dir: str
    stats_only: bool = False


def create_app(
    data_dir: str | Path | None = None,
    backend=None,
    workers: int | None = None,
) -> FastAPI:
    """Build the service; arguments default from the environment."""
    data_dir = Path(data_dir or os.environ.get("CI_DATA_DIR", "./chartsum-jobs"))
    workers = workers or int(os.environ.get("CI_WORKERS", "2"))
    backend = backend or backend_from_env()

    store = JobStore(data_dir)
    pool = ThreadPoolExecutor(max_workers=workers)
    app = FastAPI(title="chartsum", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    app.state.store = store

    def execute(job_id: str) -> None:
        job = store.load(job_id)
        job.state = RUNNING
        store.save(job)

        def on_stage(name: str) -> None:
            job.stage = name
            store.save(job)

        spec_text, data_raw = store.inputs(job_id)
        try:
            cfg = _pipeline_config(job.config)
            doc, transcript = run_pipeline(
                spec_text, data_raw, cfg, backend,
                chart_id=job_id, on_stage=on_stage,
            )
            store.save_result(job_id, doc, transcript)
            job.state = DONE
            job.stage = ""
            store.save(job)
        except Exception as exc:
            job.state = FAILED
            job.stage = ""
            job.error = str(exc)
            store.save(job)

    # recover persisted jobs: completed results stay, queued work restarts,
    # jobs interrupted mid-run are marked failed (at-most-once execution)
    for job_id in store.all_ids():
        job = store.load(job_id)
        if job.state == QUEUED:
            pool.submit(execute, job_id)
        elif job.state == RUNNING:
            job.state = FAILED
            job.stage = ""
            job.error = "interrupted by restart"
            store.save(job)

    def get_job_or_404(job_id: str) -> Job:
        try:
            return store.load(job_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"job {job_id!r} not found")

    @app.post("/jobs")
    def submit(body: SubmitBody):
        spec_text = body.spec if isinstance(body.spec, str) else json.dumps(body.spec)
        try:
            load_chart(spec_text, body.data_csv.encode() if body.data_csv else None)
            _pipeline_config(body.config)
        except (ChartsumError, ValueError) as exc:
            raise HTTPException(
                status_code=422,
                detail={"error": type(exc).__name__, "message": str(exc)},
            )
        job = store.create(spec_text, body.data_csv, body.config)
        pool.submit(execute, job.id)
        return {"id": job.id, "state": QUEUED}

    @app.get("/jobs/{job_id}")
    def status(job_id: str):
        return get_job_or_404(job_id).to_dict()

    @app.get("/jobs/{job_id}/summary")
    def summary(job_id: str):
        job = get_job_or_404(job_id)
        if job.state != DONE:
            raise HTTPException(status_code=409, detail=f"job is {job.state}")
        return json.loads(serialize(store.latest_summary(job_id)))

    @app.get("/jobs/{job_id}/transcript")
    def transcript(job_id: str):
        get_job_or_404(job_id)
        return store.transcript_dict(job_id)

    @app.post("/jobs/{job_id}/chat")
    def chat(job_id: str, body: ChatBody):
        job = get_job_or_404(job_id)
        if job.state != DONE:
            raise HTTPException(status_code=409, detail=f"job is {job.state}")
        doc = store.latest_summary(job_id)
        spec_text, data_raw = store.inputs(job_id)
        bound = load_chart(spec_text, data_raw)
        records = [uni_insight(bound, n) for n in bound.data.dimension_names]
        cfg = _pipeline_config(job.config)
        new_doc = chat_refine(doc, body.message, bound.data, backend, records, cfg)
        version = store.append_chat_version(job_id, new_doc)
        job.chat_versions = version
        store.save(job)
        edited = [s.index for s in new_doc.sentences if s.edited]
        flagged = [s.index for s in new_doc.sentences if s.unverifiable]
        return {
            "version": version,
            "summary": json.loads(serialize(new_doc)),
            "edited": edited,
            "unverifiable": flagged,
        }

    @app.post("/evaluate")
    def evaluate(body: EvaluateBody):
        try:
            entries, errors = load_corpus(body.corpus_dir)
        except ChartsumError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        stats = corpus_stats(entries)
        out = {
            "entries": [e.chart_id for e in entries],
            "errors": errors,
            "stats": stats,
            "stats_text": format_stats(stats),
        }
        if not body.stats_only:
            rows = run_eval(entries)
            out["report"] = rows
            out["report_text"] = format_report(rows)
        return out

    return app
