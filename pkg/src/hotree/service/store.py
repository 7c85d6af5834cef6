"""On-disk persistence for trees (versioned) and asynchronous build jobs.

Tree writes are write-then-rename so a crash never leaves a torn file; each
tree id has a single-writer lock and a monotonically increasing version used
for optimistic concurrency on edits.
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
from typing import Callable, Optional, Sequence

from ..build import ConstructionReport
from ..errors import TreeNotFound, VersionConflict
from ..tree import TreeEditOp, apply_edits, deserialize, serialize
from ..tree.model import HOTree

JOB_QUEUED = "queued"
JOB_RUNNING = "running"
JOB_SUCCEEDED = "succeeded"
JOB_FAILED = "failed"

SUCCESS_MESSAGE = "HO-Tree generated successfully"


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


class TreeStore:
    """Versioned tree persistence: trees/<id>.json + sidecar meta/report."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock(self, tree_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(tree_id, threading.Lock())

    def _tree_path(self, tree_id: str) -> Path:
        return self.directory / f"{tree_id}.json"

    def _meta_path(self, tree_id: str) -> Path:
        return self.directory / f"{tree_id}.meta.json"

    def _report_path(self, tree_id: str) -> Path:
        return self.directory / f"{tree_id}.report.json"

    def exists(self, tree_id: str) -> bool:
        return self._tree_path(tree_id).exists()

    def add_tree(self, tree: HOTree,
                 report: Optional[ConstructionReport] = None) -> None:
        data = serialize(tree)
        with self._lock(tree.id):
            path = self._tree_path(tree.id)
            if path.exists() and path.read_bytes() == data:
                return  # identical rebuild: keep version
            version = self.version(tree.id) + 1 if path.exists() else 1
            _atomic_write(path, data)
            _atomic_write(
                self._meta_path(tree.id),
                json.dumps({"tree_id": tree.id, "version": version}).encode(),
            )
            if report is not None:
                _atomic_write(
                    self._report_path(tree.id),
                    json.dumps(report.to_dict(), sort_keys=True).encode(),
                )

    def version(self, tree_id: str) -> int:
        meta = self._meta_path(tree_id)
        if not meta.exists():
            return 1 if self.exists(tree_id) else 0
        return json.loads(meta.read_text())["version"]

    def get_bytes(self, tree_id: str) -> tuple[bytes, int]:
        path = self._tree_path(tree_id)
        if not path.exists():
            raise TreeNotFound(f"no tree {tree_id!r}")
        return path.read_bytes(), self.version(tree_id)

    def get_tree(self, tree_id: str) -> HOTree:
        data, _ = self.get_bytes(tree_id)
        return deserialize(data)

    def get_report(self, tree_id: str) -> Optional[ConstructionReport]:
        path = self._report_path(tree_id)
        if not path.exists():
            return None
        return ConstructionReport.from_dict(json.loads(path.read_text()))

    def list_entries(self) -> list[dict]:
        entries = []
        for path in sorted(self.directory.glob("*.json")):
            if path.name.endswith(".meta.json") or \
                    path.name.endswith(".report.json"):
                continue
            tree_id = path.stem
            try:
                tree = self.get_tree(tree_id)
            except Exception:
                continue
            entries.append({
                "tree_id": tree_id,
                "version": self.version(tree_id),
                "title": tree.title,
                "node_count": len(tree.nodes),
            })
        return entries

    def apply_patch(self, tree_id: str, base_version: int,
                    edits: Sequence[TreeEditOp]) -> int:
        """Optimistic-concurrency edit application; single writer per tree."""
        with self._lock(tree_id):
            data, current = self.get_bytes(tree_id)
            if base_version != current:
                raise VersionConflict(
                    f"tree {tree_id!r} is at version {current}, "
                    f"patch targets {base_version}"
                )
            tree = deserialize(data)
            edited = apply_edits(tree, edits)
            new_version = current + 1
            _atomic_write(self._tree_path(tree_id), serialize(edited))
            _atomic_write(
                self._meta_path(tree_id),
                json.dumps({"tree_id": tree_id,
                            "version": new_version}).encode(),
            )
            return new_version


@dataclass
class BuildJob:
    id: str
    status: str = JOB_QUEUED
    tree_ids: list[str] = field(default_factory=list)
    message: str = ""
    warnings: list[str] = field(default_factory=list)
    submitted_at: float = field(default_factory=time.time)
    finished_at: Optional[float] = None
    status_history: list[str] = field(default_factory=lambda: [JOB_QUEUED])

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "status": self.status,
            "tree_ids": list(self.tree_ids),
            "message": self.message,
            "warnings": list(self.warnings),
            "submitted_at": self.submitted_at,
            "finished_at": self.finished_at,
            "status_history": list(self.status_history),
        }


_STATUS_ORDER = {JOB_QUEUED: 0, JOB_RUNNING: 1, JOB_SUCCEEDED: 2, JOB_FAILED: 2}


class JobManager:
    """Bounded worker pool running build jobs; status is monotone."""

    def __init__(self, workers: int = 2):
        self._jobs: dict[str, BuildJob] = {}
        self._guard = threading.Lock()
        self._pool = ThreadPoolExecutor(max_workers=workers)

    def _transition(self, job: BuildJob, status: str) -> None:
        with self._guard:
            if _STATUS_ORDER[status] < _STATUS_ORDER[job.status]:
                raise ValueError(
                    f"job status may not regress: {job.status} -> {status}"
                )
            job.status = status
            job.status_history.append(status)

    def submit(self, work: Callable[[BuildJob], None]) -> str:
        job = BuildJob(id=uuid.uuid4().hex[:12])
        with self._guard:
            self._jobs[job.id] = job

        def run() -> None:
            self._transition(job, JOB_RUNNING)
            try:
                work(job)
                self._transition(job, JOB_SUCCEEDED if job.tree_ids
                                 else JOB_FAILED)
                if job.status == JOB_SUCCEEDED:
                    job.message = SUCCESS_MESSAGE
                elif not job.message:
                    job.message = "no tree could be built from the upload"
            except Exception as exc:  # job failures stay in the job record
                job.message = f"build failed: {exc}"
                self._transition(job, JOB_FAILED)
            finally:
                job.finished_at = time.time()

        self._pool.submit(run)
        return job.id

    def get(self, job_id: str) -> Optional[BuildJob]:
        with self._guard:
            return self._jobs.get(job_id)

    def shutdown(self) -> None:
        self._pool.shutdown(wait=True)
