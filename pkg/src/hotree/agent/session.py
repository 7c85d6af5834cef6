"""Multi-turn conversation state and its on-disk persistence."""

from __future__ import annotations

import json
import os
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import SessionNotFound
from ..qa.answer import Answer
from ..qa.execute import ExecutionTrace, StepRecord
from ..qa.verify import ForwardCheck, VerificationReport

ROUTE_RETRIEVAL = "retrieval"
ROUTE_AGGREGATION = "aggregation"
ROUTE_IMAGE_EXTRACTION = "image_extraction"
ROUTES = (ROUTE_RETRIEVAL, ROUTE_AGGREGATION, ROUTE_IMAGE_EXTRACTION)


@dataclass
class RoutingDecision:
    route: str
    rationale: str = ""

    def __post_init__(self) -> None:
        if self.route not in ROUTES:
            raise ValueError(f"unknown route {self.route!r}")

    def to_dict(self) -> dict:
        return {"route": self.route, "rationale": self.rationale}

    @classmethod
    def from_dict(cls, d: dict) -> "RoutingDecision":
        return cls(route=d["route"], rationale=d.get("rationale", ""))


def _trace_from_dict(d: dict) -> ExecutionTrace:
    return ExecutionTrace(
        records=[
            StepRecord(
                step_id=r["step_id"], op_name=r["op_name"],
                inputs=r.get("inputs", {}), output=r.get("output"),
                duration_ms=r.get("duration_ms", 0.0),
                note=r.get("note", ""), source_meta=r.get("source_meta"),
            )
            for r in d.get("records", [])
        ],
        retrieval_path=list(d.get("retrieval_path", [])),
    )


def _verification_from_dict(d: dict) -> VerificationReport:
    return VerificationReport(
        forward_checks=[
            ForwardCheck(name=c["name"], passed=c["passed"],
                         detail=c.get("detail", ""))
            for c in d.get("forward_checks", [])
        ],
        backward_agreement=d.get("backward_agreement"),
        rephrased_question=d.get("rephrased_question"),
    )


def answer_from_dict(d: dict) -> Answer:
    return Answer(
        text=d.get("text", ""),
        confidence=d.get("confidence", 0.0),
        elapsed_ms=d.get("elapsed_ms", 0.0),
        trace=_trace_from_dict(d.get("trace", {})),
        verification=_verification_from_dict(d.get("verification", {})),
        question=d.get("question", ""),
    )


@dataclass
class Turn:
    raw_question: str
    resolved_question: str
    tree_id: str
    answer: Answer
    routing: RoutingDecision
    reply: str = ""
    warnings: list[str] = field(default_factory=list)
    asked_at: float = field(default_factory=time.time)

    def to_dict(self) -> dict:
        return {
            "raw_question": self.raw_question,
            "resolved_question": self.resolved_question,
            "tree_id": self.tree_id,
            "answer": self.answer.to_dict(),
            "routing": self.routing.to_dict(),
            "reply": self.reply,
            "warnings": list(self.warnings),
            "asked_at": self.asked_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Turn":
        return cls(
            raw_question=d["raw_question"],
            resolved_question=d["resolved_question"],
            tree_id=d.get("tree_id", ""),
            answer=answer_from_dict(d.get("answer", {})),
            routing=RoutingDecision.from_dict(
                d.get("routing", {"route": ROUTE_RETRIEVAL})
            ),
            reply=d.get("reply", ""),
            warnings=list(d.get("warnings", [])),
            asked_at=d.get("asked_at", 0.0),
        )


@dataclass
class Session:
    id: str
    turns: list[Turn] = field(default_factory=list)
    tree_ids: list[str] = field(default_factory=list)
    active_tree: Optional[str] = None
    created_at: float = field(default_factory=time.time)

    @classmethod
    def new(cls) -> "Session":
        return cls(id=uuid.uuid4().hex[:12])

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "turns": [t.to_dict() for t in self.turns],
            "tree_ids": list(self.tree_ids),
            "active_tree": self.active_tree,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Session":
        return cls(
            id=d["id"],
            turns=[Turn.from_dict(t) for t in d.get("turns", [])],
            tree_ids=list(d.get("tree_ids", [])),
            active_tree=d.get("active_tree"),
            created_at=d.get("created_at", 0.0),
        )


class SessionStore:
    """One JSON document per session, written atomically (write-then-rename)."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, session_id: str) -> Path:
        return self.directory / f"{session_id}.json"

    def save(self, session: Session) -> None:
        path = self._path(session.id)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(
            json.dumps(session.to_dict(), sort_keys=True, ensure_ascii=False),
            encoding="utf-8",
        )
        os.replace(tmp, path)

    def load(self, session_id: str) -> Session:
        path = self._path(session_id)
        if not path.exists():
            raise SessionNotFound(f"no session {session_id!r}")
        return Session.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def exists(self, session_id: str) -> bool:
        return self._path(session_id).exists()

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.directory.glob("*.json"))
