"""Job lifecycle: persistent records, FIFO worker pool, artifact retention.

One JSON document per job under the data directory; no database. All record
mutation funnels through the store so there is a single writer at a time per
job, and crash recovery simply re-queues anything caught mid-run.
"""

import json
import os
import queue
import shutil
import threading
import time
import uuid
from dataclasses import asdict, dataclass, field

STATES = (
    "queued",
    "fetching",
    "probing",
    "segmenting",
    "scoring",
    "selecting",
    "saliency",
    "cropping",
    "rendering",
    "done",
    "failed",
)
_ORDER = {name: i for i, name in enumerate(STATES)}
TERMINAL = {"done", "failed"}


class NotFound(KeyError):
    pass


@dataclass
class SummaryJob:
    id: str
    source: str
    spec: dict  # {"target_duration", "aspect", "origin"}
    label: str = ""
    sidecars: dict = field(default_factory=dict)  # {"shots"|"scores"|"saliency": path-or-url}
    state: str = "queued"
    progress: float = 0.0
    created: float = field(default_factory=time.time)
    updated: float = field(default_factory=time.time)
    result: dict | None = None
    error: str | None = None
    purged: bool = False

    @classmethod
    def new(cls, source: str, spec: dict, label: str = "", sidecars: dict | None = None):
        return cls(
            id=uuid.uuid4().hex[:12],
            source=source,
            spec=spec,
            label=label or os.path.basename(source) or source,
            sidecars=sidecars or {},
        )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SummaryJob":
        return cls(**data)


class JobStore:
    """JSON-per-job persistence with serialized mutation."""

    def __init__(self, jobs_dir: str):
        self.jobs_dir = jobs_dir
        os.makedirs(jobs_dir, exist_ok=True)
        self._lock = threading.RLock()

    def _path(self, job_id: str) -> str:
        return os.path.join(self.jobs_dir, f"{job_id}.json")

    def save(self, job: SummaryJob) -> None:
        with self._lock:
            job.updated = time.time()
            tmp = self._path(job.id) + ".tmp"
            with open(tmp, "w") as fh:
                json.dump(job.to_dict(), fh)
            os.replace(tmp, self._path(job.id))

    def get(self, job_id: str) -> SummaryJob:
        path = self._path(job_id)
        with self._lock:
            if not os.path.isfile(path):
                raise NotFound(job_id)
            with open(path) as fh:
                return SummaryJob.from_dict(json.load(fh))

    def all(self) -> list:
        with self._lock:
            jobs = []
            for name in os.listdir(self.jobs_dir):
                if name.endswith(".json"):
                    with open(os.path.join(self.jobs_dir, name)) as fh:
                        jobs.append(SummaryJob.from_dict(json.load(fh)))
            return sorted(jobs, key=lambda j: j.created)

    def advance(self, job_id: str, state: str, progress: float | None = None) -> SummaryJob:
        """Move a job forward; backward transitions are a bug and raise."""
        with self._lock:
            job = self.get(job_id)
            if _ORDER[state] < _ORDER[job.state] and state != "failed":
                raise ValueError(f"job {job_id}: cannot move {job.state} -> {state}")
            job.state = state
            if progress is not None:
                job.progress = max(job.progress, min(progress, 1.0))
            if state == "done":
                job.progress = 1.0
            self.save(job)
            return job

    def fail(self, job_id: str, message: str) -> SummaryJob:
        with self._lock:
            job = self.get(job_id)
            job.state = "failed"
            job.error = message
            self.save(job)
            return job

    def set_result(self, job_id: str, result: dict) -> SummaryJob:
        with self._lock:
            job = self.get(job_id)
            job.result = result
            self.save(job)
            return job


class JobRuntime:
    """FIFO queue plus worker threads executing the pipeline."""

    def __init__(self, store: JobStore, runner, workers: int = 2, work_root: str = ""):
        self.store = store
        self.runner = runner  # callable(job_id, cancelled: callable) -> None
        self.work_root = work_root
        self._queue: queue.Queue = queue.Queue()
        self._cancelled: set = set()
        self._cancel_lock = threading.Lock()
        self._threads = [
            threading.Thread(target=self._work, name=f"clipfit-worker-{i}", daemon=True)
            for i in range(max(workers, 1))
        ]
        self._stop = threading.Event()

    def start(self) -> None:
        for t in self._threads:
            t.start()

    def stop(self) -> None:
        self._stop.set()
        for _ in self._threads:
            self._queue.put(None)

    def submit(self, job_id: str) -> None:
        self._queue.put(job_id)

    def cancel(self, job_id: str) -> None:
        with self._cancel_lock:
            self._cancelled.add(job_id)

    def is_cancelled(self, job_id: str) -> bool:
        with self._cancel_lock:
            return job_id in self._cancelled

    def recover(self) -> None:
        """Re-queue jobs caught mid-run by a previous process, workdir discarded."""
        for job in self.store.all():
            if job.state not in TERMINAL:
                workdir = os.path.join(self.work_root, job.id)
                if os.path.isdir(workdir):
                    shutil.rmtree(workdir, ignore_errors=True)
                job.state = "queued"
                job.progress = 0.0
                self.store.save(job)
                self.submit(job.id)

    def _work(self) -> None:
        while not self._stop.is_set():
            job_id = self._queue.get()
            if job_id is None:
                break
            try:
                if self.is_cancelled(job_id):
                    self.store.fail(job_id, "cancelled before start")
                else:
                    self.runner(job_id, lambda: self.is_cancelled(job_id))
            except Exception as exc:  # pipeline bugs must not kill the worker
                try:
                    self.store.fail(job_id, f"internal error: {exc}")
                except Exception:
                    pass
            finally:
                self._queue.task_done()

    def wait_idle(self, timeout: float = 120.0) -> bool:
        """Testing aid: block until the queue drains or timeout."""
        deadline = time.time() + timeout
        while time.time() < deadline:
            if self._queue.unfinished_tasks == 0:
                return True
            time.sleep(0.02)
        return False


def remove_artifacts(work_root: str, job_id: str) -> None:
    """Drop a job's work directory plus any uploaded source/sidecar files.

    Uploads live outside the per-job work directory so that crash recovery
    (which discards the work directory) can still re-run the job.
    """
    shutil.rmtree(os.path.join(work_root, job_id), ignore_errors=True)
    uploads = os.path.join(work_root, "_uploads")
    if os.path.isdir(uploads):
        for name in os.listdir(uploads):
            if name.startswith(job_id):
                try:
                    os.unlink(os.path.join(uploads, name))
                except OSError:
                    pass


def purge_expired(store: JobStore, work_root: str, ttl_hours: float, now: float | None = None) -> list:
    """Delete artifacts of terminal jobs older than the TTL; keep the records."""
    now = now if now is not None else time.time()
    cutoff = now - ttl_hours * 3600.0
    purged = []
    for job in store.all():
        if job.state in TERMINAL and not job.purged and job.updated < cutoff:
            remove_artifacts(work_root, job.id)
            job.purged = True
            store.save(job)
            purged.append(job.id)
    return purged
