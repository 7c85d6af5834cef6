"""Structured JSONL event log with cursor-based reads for the log viewer."""

from __future__ import annotations

import json
import threading
import time
from pathlib import Path


class EventLog:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._guard = threading.Lock()

    def emit(self, stage: str, event: str, **detail) -> None:
        line = json.dumps(
            {"ts": time.time(), "stage": stage, "event": event,
             "detail": detail},
            ensure_ascii=False, sort_keys=True,
        )
        with self._guard:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def read_after(self, cursor: int, limit: int = 500) -> tuple[list[dict], int]:
        """Entries after the line-index cursor plus the next cursor."""
        cursor = max(0, cursor)
        if not self.path.exists():
            return [], cursor
        with self._guard:
            lines = self.path.read_text(encoding="utf-8").splitlines()
        selected = lines[cursor:cursor + limit]
        entries = []
        for line in selected:
            try:
                entries.append(json.loads(line))
            except json.JSONDecodeError:
                continue
        return entries, cursor + len(selected)
