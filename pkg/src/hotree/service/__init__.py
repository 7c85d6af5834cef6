"""HTTP service wrapping the core package."""

from .app import create_app
from .logs import EventLog
from .store import (
    JOB_FAILED,
    JOB_QUEUED,
    JOB_RUNNING,
    JOB_SUCCEEDED,
    SUCCESS_MESSAGE,
    BuildJob,
    JobManager,
    TreeStore,
)

__all__ = [
    "BuildJob",
    "EventLog",
    "JOB_FAILED",
    "JOB_QUEUED",
    "JOB_RUNNING",
    "JOB_SUCCEEDED",
    "JobManager",
    "SUCCESS_MESSAGE",
    "TreeStore",
    "create_app",
]
