"""The HTTP service: upload/build jobs, tree retrieval and editing,
multi-turn QA, session management, log access, model configuration.

All state lives under one data directory (trees/, sessions/, logs/,
models.json) in inspectable flat files; the app can be restarted over the
same directory and serve everything it wrote before.
"""

from __future__ import annotations

import base64
import threading
from pathlib import Path, PurePath
from typing import Optional

from fastapi import FastAPI, File, Form, Query, Request, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..agent import Orchestrator, Session, SessionStore, extract_tag
from ..agent.orchestrator import parse_grid_reply
from ..build import build_hotree, merge_sheets
from ..config import DEFAULT_PIPELINE, BuildParams, PipelineConfig
from ..errors import (
    GatewayError,
    HotreeError,
    SessionNotFound,
    TreeEditError,
    TreeError,
    TreeNotFound,
    UnsupportedFormat,
    VersionConflict,
)
from ..gateway import (
    ChatRequest,
    Gateway,
    HttpGateway,
    ProviderConfig,
    load_model_config,
    save_model_config,
)
from ..ingest import IMAGE_EXTENSIONS, TABLE_EXTENSIONS, parse_table
from ..tree import edit_from_dict
from .logs import EventLog
from .schemas import (
    AnswerResponse,
    ErrorBody,
    JobStatusResponse,
    JobSubmitResponse,
    LogsResponse,
    PatchTreeRequest,
    PatchTreeResponse,
    ProviderConfigModel,
    QuestionRequest,
    SessionCreateResponse,
    SessionSummary,
    TreeListEntry,
)
from .store import BuildJob, JobManager, TreeStore

MAX_QUESTION_BYTES = 64 * 1024

_ERROR_STATUS: list[tuple[type, int]] = [
    (VersionConflict, 409),
    (SessionNotFound, 404),
    (TreeNotFound, 404),
    (UnsupportedFormat, 400),
    (TreeEditError, 422),
    (TreeError, 422),
    (GatewayError, 502),
]


def _status_for(exc: HotreeError) -> int:
    for kind, status in _ERROR_STATUS:
        if isinstance(exc, kind):
            return status
    return 500


class ServiceState:
    def __init__(self, data_dir: Path, gateway: Optional[Gateway],
                 decomposer: str, build_params: BuildParams,
                 pipeline: PipelineConfig, workers: int):
        self.data_dir = data_dir
        self.trees = TreeStore(data_dir / "trees")
        self.sessions = SessionStore(data_dir / "sessions")
        self.log = EventLog(data_dir / "logs" / "app.jsonl")
        self.jobs = JobManager(workers=workers)
        self.models_path = data_dir / "models.json"
        self.build_params = build_params
        self.pipeline = pipeline
        self.decomposer = decomposer
        self._gateway_injected = gateway is not None
        self.gateway = gateway if gateway is not None else self._load_gateway()
        self.orchestrator = self._make_orchestrator()
        self._session_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _load_gateway(self) -> Optional[Gateway]:
        if self.models_path.exists():
            try:
                return HttpGateway(load_model_config(self.models_path))
            except (ValueError, KeyError):
                return None
        return None

    def _make_orchestrator(self) -> Orchestrator:
        return Orchestrator(
            trees=self.trees,
            gateway=self.gateway,
            config=self.pipeline,
            build_params=self.build_params,
            decomposer=self.decomposer,
            log=self.log.emit,
        )

    def refresh_gateway(self) -> None:
        if self._gateway_injected:
            return
        self.gateway = self._load_gateway()
        self.orchestrator = self._make_orchestrator()

    def session_lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._session_locks.setdefault(session_id, threading.Lock())

    def build_one_file(self, name: str, data: bytes, job: BuildJob,
                       params: Optional[BuildParams] = None) -> None:
        """Ingest one upload into one tree (sheets merged under one root)."""
        params = params or self.build_params
        ext = PurePath(name).suffix.lower()
        if ext in IMAGE_EXTENSIONS:
            if self.gateway is None:
                raise UnsupportedFormat(
                    f"{name}: image extraction needs a configured vlm provider"
                )
            payload = "data:image/png;base64," + \
                base64.b64encode(data).decode("ascii")
            reply = self.gateway.complete(
                ChatRequest(
                    prompt=("Extract the table in this image as tab-separated "
                            "rows, one line per row. Output the rows only."),
                    image=payload,
                    tag=extract_tag(name),
                ),
                kind="vlm",
            )
            grid = parse_grid_reply(reply, name)
            sheets = [(PurePath(name).stem, grid)]
            # the vlm already extracted structure; detect headers by layout
            params = BuildParams(tau=params.tau, mode="heuristic")
        else:
            sheets = parse_table(name, data).sheets

        trees = []
        for _, grid in sheets:
            tree, report = build_hotree(
                grid,
                gateway=self.gateway,
                tau=params.tau,
                mode=params.mode,
            )
            trees.append((tree, report))
        if len(trees) == 1:
            tree, report = trees[0]
        else:
            tree = merge_sheets([t for t, _ in trees])
            report = trees[0][1]
            report.meta_count = sum(r.meta_count for _, r in trees)
            report.body_count = sum(r.body_count for _, r in trees)
            report.warnings = [w for _, r in trees for w in r.warnings]
        self.trees.add_tree(tree, report)
        job.tree_ids.append(tree.id)
        self.log.emit("table2tree", "build.succeeded", file=name,
                      tree_id=tree.id, nodes=len(tree.nodes))


def create_app(data_dir: str | Path, gateway: Optional[Gateway] = None,
               decomposer: str = "template",
               build_params: BuildParams = BuildParams(),
               pipeline: PipelineConfig = DEFAULT_PIPELINE,
               workers: int = 2,
               static_dir: Optional[str | Path] = None) -> FastAPI:
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    state = ServiceState(data_dir, gateway, decomposer, build_params,
                         pipeline, workers)

    app = FastAPI(title="hotree", version="1.0")
    app.state.service = state
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(HotreeError)
    async def hotree_error_handler(_req: Request, exc: HotreeError):
        body = ErrorBody(code=exc.code, message=exc.message,
                         detail=exc.detail)
        return JSONResponse(status_code=_status_for(exc),
                            content=body.model_dump())

    # -- build jobs -----------------------------------------------------------

    @app.post("/api/v1/jobs", response_model=JobSubmitResponse)
    async def submit_job(files: list[UploadFile] = File(...),
                         mode: str = Form("auto"),
                         tau: float = Form(state.build_params.tau)):
        if not files:
            raise UnsupportedFormat("no files in upload")
        accepted = TABLE_EXTENSIONS | IMAGE_EXTENSIONS
        payloads = []
        for upload in files:
            name = upload.filename or "upload"
            if PurePath(name).suffix.lower() not in accepted:
                raise UnsupportedFormat(
                    f"unsupported table format: {PurePath(name).suffix!r}"
                )
            payloads.append((name, await upload.read()))
        params = BuildParams(tau=tau, mode=mode)

        def work(job: BuildJob) -> None:
            for name, data in payloads:
                try:
                    state.build_one_file(name, data, job, params)
                except Exception as exc:
                    job.warnings.append(f"{name}: {exc}")
                    state.log.emit("table2tree", "build.failed", file=name,
                                   error=str(exc))

        job_id = state.jobs.submit(work)
        state.log.emit("service", "job.submitted", job_id=job_id,
                       files=[n for n, _ in payloads])
        return JobSubmitResponse(job_id=job_id)

    @app.get("/api/v1/jobs/{job_id}", response_model=JobStatusResponse)
    async def job_status(job_id: str):
        job = state.jobs.get(job_id)
        if job is None:
            raise TreeNotFound(f"no job {job_id!r}")
        return JobStatusResponse(**job.to_dict())

    # -- trees ----------------------------------------------------------------

    @app.get("/api/v1/trees", response_model=list[TreeListEntry])
    async def list_trees():
        return [TreeListEntry(**entry) for entry in state.trees.list_entries()]

    @app.get("/api/v1/trees/{tree_id}")
    async def get_tree(tree_id: str):
        data, version = state.trees.get_bytes(tree_id)
        return Response(
            content=data,
            media_type="application/json",
            headers={"ETag": f'"{version}"',
                     "X-Tree-Version": str(version)},
        )

    @app.get("/api/v1/trees/{tree_id}/report")
    async def get_tree_report(tree_id: str):
        report = state.trees.get_report(tree_id)
        if report is None:
            raise TreeNotFound(f"no report for tree {tree_id!r}")
        return report.to_dict()

    @app.patch("/api/v1/trees/{tree_id}", response_model=PatchTreeResponse)
    async def patch_tree(tree_id: str, payload: PatchTreeRequest):
        edits = [edit_from_dict(e) for e in payload.edits]
        version = state.trees.apply_patch(tree_id, payload.base_version, edits)
        state.log.emit("editor", "tree.patched", tree_id=tree_id,
                       version=version, edits=len(edits))
        return PatchTreeResponse(tree_id=tree_id, version=version)

    # -- sessions and questions ------------------------------------------------

    @app.post("/api/v1/sessions", response_model=SessionCreateResponse)
    async def create_session():
        session = Session.new()
        session.tree_ids = [e["tree_id"] for e in state.trees.list_entries()]
        state.sessions.save(session)
        state.log.emit("service", "session.created", session_id=session.id)
        return SessionCreateResponse(session_id=session.id)

    @app.get("/api/v1/sessions", response_model=list[SessionSummary])
    async def list_sessions():
        out = []
        for sid in state.sessions.list_ids():
            s = state.sessions.load(sid)
            out.append(SessionSummary(
                id=s.id, created_at=s.created_at, turn_count=len(s.turns),
                tree_ids=s.tree_ids, active_tree=s.active_tree,
            ))
        return out

    @app.get("/api/v1/sessions/{session_id}")
    async def get_session(session_id: str):
        return state.sessions.load(session_id).to_dict()

    @app.post("/api/v1/sessions/{session_id}/questions",
              response_model=AnswerResponse)
    async def post_question(session_id: str, payload: QuestionRequest):
        if len(payload.question.encode("utf-8")) > MAX_QUESTION_BYTES:
            return JSONResponse(
                status_code=413,
                content=ErrorBody(code="question_too_large",
                                  message="question body exceeds limit",
                                  ).model_dump(),
            )
        with state.session_lock(session_id):
            session = state.sessions.load(session_id)
            # pick up trees built since the session was created
            known = set(session.tree_ids)
            for entry in state.trees.list_entries():
                if entry["tree_id"] not in known:
                    session.tree_ids.append(entry["tree_id"])
            turn = state.orchestrator.handle_turn(
                session, payload.question, attachments=payload.attachments
            )
            state.sessions.save(session)
        d = turn.to_dict()
        return AnswerResponse(
            session_id=session_id,
            raw_question=d["raw_question"],
            resolved_question=d["resolved_question"],
            tree_id=d["tree_id"],
            text=d["answer"]["text"],
            confidence=d["answer"]["confidence"],
            elapsed_ms=d["answer"]["elapsed_ms"],
            trace=d["answer"]["trace"],
            verification=d["answer"]["verification"],
            routing=d["routing"],
            reply=d["reply"],
            warnings=d["warnings"],
        )

    # -- logs and model config --------------------------------------------------

    @app.get("/api/v1/logs", response_model=LogsResponse)
    async def get_logs(after: int = Query(0, ge=0)):
        entries, cursor = state.log.read_after(after)
        return LogsResponse(entries=entries, cursor=cursor)

    @app.get("/api/v1/config/models",
             response_model=dict[str, ProviderConfigModel])
    async def get_model_config():
        if not state.models_path.exists():
            return {}
        return {
            kind: ProviderConfigModel(**cfg.to_dict())
            for kind, cfg in load_model_config(state.models_path).items()
        }

    @app.put("/api/v1/config/models",
             response_model=dict[str, ProviderConfigModel])
    async def put_model_config(payload: dict[str, ProviderConfigModel]):
        try:
            configs = {
                kind: ProviderConfig.from_dict(model.model_dump())
                for kind, model in payload.items()
            }
        except ValueError as exc:
            raise TreeError(str(exc))  # 422 via the handler
        save_model_config(state.models_path, configs)
        state.refresh_gateway()
        state.log.emit("service", "models.configured",
                       kinds=sorted(configs))
        return payload

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True),
                  name="ui")

    return app
