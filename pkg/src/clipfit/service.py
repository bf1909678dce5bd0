"""HTTP JSON API around the summary pipeline.

POST   /api/v1/jobs            submit (multipart upload or {"url": ...})
GET    /api/v1/jobs/{id}       status snapshot
GET    /api/v1/jobs/{id}/result result document
GET    /api/v1/jobs/{id}/download rendered media
GET    /api/v1/presets         platform presets
DELETE /api/v1/jobs/{id}       cancel / purge
"""

import contextlib
import json
import os
import shutil
import threading

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from starlette.datastructures import UploadFile

from . import jobs as jobs_mod
from .config import ServiceConfig
from .jobs import JobRuntime, JobStore, SummaryJob, purge_expired
from .pipeline import run_pipeline
from .presets import InvalidSpec, UnknownPreset, load_presets, spec_from_custom, spec_from_preset

PURGE_INTERVAL_SEC = 300.0


def _spec_dict(spec) -> dict:
    return {
        "target_duration": spec.target_duration,
        "aspect": str(spec.aspect),
        "origin": spec.origin,
    }


def _status_payload(job: SummaryJob) -> dict:
    stage = job.state if job.state not in ("queued", "done", "failed") else None
    return {
        "job_id": job.id,
        "state": job.state,
        "stage": stage,
        "progress": job.progress,
        "label": job.label,
        "error": job.error,
        "created": job.created,
        "updated": job.updated,
    }


def create_app(config: ServiceConfig | None = None, start_workers: bool = True) -> FastAPI:
    config = config or ServiceConfig()
    os.makedirs(config.data_dir, exist_ok=True)
    os.makedirs(config.work_dir, exist_ok=True)
    store = JobStore(config.jobs_dir)
    presets = load_presets(config.presets_file or None)

    def runner(job_id, cancelled):
        run_pipeline(store.get(job_id), store, config, cancelled=cancelled)

    runtime = JobRuntime(store, runner, workers=config.workers, work_root=config.work_dir)

    purge_stop = threading.Event()

    def purge_loop():
        while not purge_stop.wait(PURGE_INTERVAL_SEC):
            purge_expired(store, config.work_dir, config.ttl_hours)

    @contextlib.asynccontextmanager
    async def lifespan(_: FastAPI):
        runtime.recover()
        if start_workers:
            runtime.start()
            threading.Thread(target=purge_loop, daemon=True).start()
        yield
        purge_stop.set()
        runtime.stop()

    app = FastAPI(title="clipfit", version="0.1.0", lifespan=lifespan)
    app.state.store = store
    app.state.runtime = runtime
    app.state.config = config

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse(status_code=status, content={"error": message})

    def build_spec(preset_id, custom):
        if preset_id:
            return spec_from_preset(preset_id, presets)
        if custom is None:
            raise InvalidSpec("either preset or custom spec required")
        return spec_from_custom(custom.get("duration_sec"), custom.get("aspect"))

    def enqueue(source: str, spec, label: str, sidecars: dict) -> str:
        job = SummaryJob.new(source, _spec_dict(spec), label=label, sidecars=sidecars)
        store.save(job)
        runtime.submit(job.id)
        return job.id

    @app.post("/api/v1/jobs", status_code=202)
    async def submit_job(request: Request):
        content_type = request.headers.get("content-type", "")
        try:
            if content_type.startswith("application/json"):
                body = await request.json()
                url = body.get("url", "")
                if not url:
                    return error(400, "url required")
                spec = build_spec(body.get("preset"), body.get("custom"))
                sidecars = {
                    k: body[f"{k}_url"]
                    for k in ("scores", "saliency", "shots")
                    if body.get(f"{k}_url")
                }
                return {"job_id": enqueue(url, spec, os.path.basename(url), sidecars)}

            if not content_type.startswith("multipart/form-data"):
                return error(400, "send JSON with a url or a multipart upload")
            form = await request.form()
            file = form.get("file")
            if not isinstance(file, UploadFile):
                return error(400, "multipart upload needs a 'file' field")
            custom_raw = form.get("custom")
            custom_dict = json.loads(custom_raw) if custom_raw else None
            spec = build_spec(form.get("preset"), custom_dict)
            uploads_dir = os.path.join(config.work_dir, "_uploads")
            os.makedirs(uploads_dir, exist_ok=True)
            suffix = os.path.splitext(file.filename or "")[1] or ".mp4"
            job = SummaryJob.new("upload", _spec_dict(spec), label=file.filename or "upload")
            upload_path = os.path.join(uploads_dir, f"{job.id}{suffix}")
            written = 0
            with open(upload_path, "wb") as fh:
                while chunk := await file.read(1 << 20):
                    written += len(chunk)
                    if written > config.max_upload_bytes:
                        fh.close()
                        os.unlink(upload_path)
                        return error(413, "upload exceeds max_upload_bytes")
                    fh.write(chunk)
            job.source = upload_path
            for kind in ("scores", "saliency", "shots"):
                upload = form.get(kind)
                if isinstance(upload, UploadFile):
                    sidecar_path = os.path.join(uploads_dir, f"{job.id}-{kind}")
                    with open(sidecar_path, "wb") as fh:
                        shutil.copyfileobj(upload.file, fh)
                    job.sidecars[kind] = sidecar_path
            store.save(job)
            runtime.submit(job.id)
            return {"job_id": job.id}
        except UnknownPreset as exc:
            return error(400, f"unknown preset {exc.args[0]!r}")
        except InvalidSpec as exc:
            return error(400, str(exc))
        except json.JSONDecodeError:
            return error(400, "request body is not valid JSON")

    @app.get("/api/v1/jobs/{job_id}")
    def job_status(job_id: str):
        try:
            return _status_payload(store.get(job_id))
        except jobs_mod.NotFound:
            return error(404, "no such job")

    @app.get("/api/v1/jobs/{job_id}/result")
    def job_result(job_id: str):
        try:
            job = store.get(job_id)
        except jobs_mod.NotFound:
            return error(404, "no such job")
        if job.purged:
            return error(410, "artifacts purged")
        if job.state == "failed":
            return error(409, f"job failed: {job.error}")
        if job.state != "done":
            return error(409, "job not done yet")
        doc = dict(job.result or {})
        doc["job_id"] = job.id
        doc["download"] = f"/api/v1/jobs/{job.id}/download"
        return doc

    @app.get("/api/v1/jobs/{job_id}/download")
    def job_download(job_id: str):
        try:
            job = store.get(job_id)
        except jobs_mod.NotFound:
            return error(404, "no such job")
        if job.state != "done":
            return error(409, "job not done yet")
        path = (job.result or {}).get("output_path", "")
        if job.purged or not os.path.isfile(path):
            return error(410, "artifacts purged")
        return FileResponse(
            path,
            media_type="video/mp4" if path.endswith(".mp4") else "application/octet-stream",
            filename=os.path.basename(path),
        )

    @app.get("/api/v1/presets")
    def list_presets():
        return [
            {
                "id": p.id,
                "label": p.label,
                "max_duration_sec": p.max_duration,
                "aspect": str(p.aspect),
            }
            for p in presets.values()
        ]

    @app.delete("/api/v1/jobs/{job_id}")
    def delete_job(job_id: str):
        try:
            job = store.get(job_id)
        except jobs_mod.NotFound:
            return error(404, "no such job")
        if job.state not in jobs_mod.TERMINAL:
            runtime.cancel(job_id)
        jobs_mod.remove_artifacts(config.work_dir, job_id)
        if job.state in jobs_mod.TERMINAL:
            job.purged = True
            store.save(job)
        return {"job_id": job_id, "status": "purged" if job.state in jobs_mod.TERMINAL else "cancelling"}

    if config.static_dir and os.path.isdir(config.static_dir):
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app


def serve(config: ServiceConfig) -> None:
    import uvicorn

    host, port = config.host_port()
    uvicorn.run(create_app(config), host=host, port=port, log_level="info")
