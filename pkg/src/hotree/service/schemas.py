"""Pydantic request/response models for the v1 HTTP API."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class ErrorBody(BaseModel):
    code: str
    message: str
    detail: Optional[object] = None


class JobSubmitResponse(BaseModel):
    job_id: str


class JobStatusResponse(BaseModel):
    id: str
    status: str
    tree_ids: list[str]
    message: str
    warnings: list[str] = Field(default_factory=list)
    submitted_at: float
    finished_at: Optional[float] = None
    status_history: list[str] = Field(default_factory=list)


class TreeListEntry(BaseModel):
    tree_id: str
    version: int
    title: str
    node_count: int


class PatchTreeRequest(BaseModel):
    base_version: int
    edits: list[dict]


class PatchTreeResponse(BaseModel):
    tree_id: str
    version: int


class SessionCreateResponse(BaseModel):
    session_id: str


class SessionSummary(BaseModel):
    id: str
    created_at: float
    turn_count: int
    tree_ids: list[str]
    active_tree: Optional[str] = None


class QuestionRequest(BaseModel):
    question: str
    attachments: Optional[list[str]] = None


class StepRecordModel(BaseModel):
    step_id: int
    op_name: str
    inputs: dict
    output: object = None
    duration_ms: float
    note: str = ""
    source_meta: Optional[str] = None


class TraceModel(BaseModel):
    records: list[StepRecordModel]
    retrieval_path: list[str]


class ForwardCheckModel(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class VerificationModel(BaseModel):
    forward_checks: list[ForwardCheckModel]
    backward_agreement: Optional[bool] = None
    rephrased_question: Optional[str] = None


class RoutingModel(BaseModel):
    route: str
    rationale: str = ""


class AnswerResponse(BaseModel):
    session_id: str
    raw_question: str
    resolved_question: str
    tree_id: str
    text: str
    confidence: float
    elapsed_ms: float
    trace: TraceModel
    verification: VerificationModel
    routing: RoutingModel
    reply: str
    warnings: list[str] = Field(default_factory=list)


class LogsResponse(BaseModel):
    entries: list[dict]
    cursor: int


class ProviderConfigModel(BaseModel):
    kind: str
    endpoint: str
    model_name: str
    auth_env_var: str
    timeout_ms: int = 30_000
