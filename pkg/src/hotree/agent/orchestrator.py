"""The controller between user turns and the answering pipeline.

Per turn: complete under-specified questions from session history, localize
the target tree among everything uploaded so far, route (retrieval,
aggregation, or image extraction), answer, and frame the reply.  Sub-errors
are captured into the turn's answer; a turn is always produced.
"""

from __future__ import annotations

import json
import re
import time
from typing import Callable, Optional, Protocol, Sequence

from ..build import build_hotree, ConstructionReport
from ..config import DEFAULT_BUILD, DEFAULT_PIPELINE, BuildParams, PipelineConfig
from ..errors import GatewayError, HotreeError, NoTrees
from ..gateway import ChatRequest, Gateway, cosine_similarity
from ..grid import Cell, CellGrid, SourceRef, Text
from ..qa import LLMDecomposer, TemplateDecomposer, answer as run_answer
from ..qa.answer import Answer
from ..tree.model import HOTree, NodeKind
from .session import (
    ROUTE_AGGREGATION,
    ROUTE_IMAGE_EXTRACTION,
    ROUTE_RETRIEVAL,
    RoutingDecision,
    Session,
    Turn,
)

_REFERRING = re.compile(
    r"\b(this|that|these|those|it|its|they|them|their|he|she|his|her)\b"
    r"|\bthe table from\b",
    re.IGNORECASE,
)

_AGG_INTENT = re.compile(
    r"\b(sum|total|average|avg|mean|min(?:imum)?|max(?:imum)?|count|"
    r"how many|number of|top|smallest|largest|lowest|highest)\b",
    re.IGNORECASE,
)

AGG_FINAL_OPS = {"aggregate", "top_k", "compare"}


def resolve_tag(question: str) -> str:
    return "resolve:" + re.sub(r"\s+", " ", question.strip().casefold())


def extract_tag(image_id: str) -> str:
    return f"extract-grid:{image_id}"


def parse_grid_reply(reply: str, image_id: str) -> CellGrid:
    """Grid from a model extraction reply: JSON rows or pipe/tab lines."""
    rows: list[list[str]] = []
    text = reply.strip()
    fence = re.match(r"^```[a-zA-Z]*\n(.*)\n```$", text, re.DOTALL)
    if fence:
        text = fence.group(1).strip()
    try:
        doc = json.loads(text)
        if isinstance(doc, list):
            rows = [[str(v) for v in row] for row in doc
                    if isinstance(row, list)]
    except json.JSONDecodeError:
        pass
    if not rows:
        sep = "\t" if "\t" in text else "|"
        for line in text.splitlines():
            if not line.strip():
                continue
            fields = [f.strip() for f in line.strip().strip("|").split(sep)]
            rows.append(fields)
        rows = [r for r in rows
                if any(f for f in r) and not all(set(f) <= {"-", ":"} for f in r)]
    if not rows:
        raise HotreeError("extraction reply contained no table rows")
    cols = max(len(r) for r in rows)
    cells = [
        Cell(row=r, col=c, content=Text(value))
        for r, row in enumerate(rows)
        for c, value in enumerate(row)
        if value.strip()
    ]
    return CellGrid(rows=len(rows), cols=cols, cells=cells,
                    source=SourceRef(file_name=image_id))


def tree_signature(tree: HOTree) -> str:
    labels = [tree.title] + [
        n.label for n in tree.preorder()
        if n.kind is NodeKind.META and n.label.strip()
    ]
    return " | ".join(dict.fromkeys(labels))


class TreeProvider(Protocol):
    def get_tree(self, tree_id: str) -> HOTree: ...

    def add_tree(self, tree: HOTree, report: ConstructionReport) -> None: ...


LogFn = Callable[..., None]


class Orchestrator:
    def __init__(self, trees: TreeProvider, gateway: Optional[Gateway] = None,
                 config: PipelineConfig = DEFAULT_PIPELINE,
                 build_params: BuildParams = DEFAULT_BUILD,
                 decomposer: str = "template",
                 log: Optional[LogFn] = None):
        self.trees = trees
        self.gateway = gateway
        self.config = config
        self.build_params = build_params
        if decomposer == "llm":
            if gateway is None:
                raise ValueError("llm decomposer requires a gateway")
            self.decomposer = LLMDecomposer(gateway)
        else:
            self.decomposer = TemplateDecomposer()
        self._log = log or (lambda stage, event, **detail: None)

    # -- reference resolution -------------------------------------------------

    def resolve_references(self, question: str,
                           session: Session) -> tuple[str, list[str]]:
        """Returns (resolved question, warnings)."""
        if not _REFERRING.search(question):
            return question, []
        history = session.turns[-self.config.resolve_context_turns:]
        if not history:
            return question, ["nothing in history to resolve references against"]
        if self.gateway is None:
            return question, ["no model available to resolve references"]
        context = "\n".join(
            f"Q: {t.resolved_question}\nA: {t.answer.text}" for t in history
        )
        try:
            rewritten = self.gateway.complete(
                ChatRequest(
                    prompt=(
                        "Rewrite the final question so it is fully "
                        "self-contained, replacing pronouns and references "
                        "using the conversation. Reply with the rewritten "
                        f"question only.\n\n{context}\n\n"
                        f"Final question: {question}"
                    ),
                    tag=resolve_tag(question),
                ),
                kind="llm",
            ).strip()
        except GatewayError as exc:
            return question, [f"reference resolution failed: {exc.message}"]
        if not rewritten:
            return question, ["reference resolution returned nothing"]
        warnings = []
        if _REFERRING.search(rewritten):
            warnings.append("resolved question still contains references")
        return rewritten, warnings

    # -- table localization ---------------------------------------------------

    def localize_table(self, question: str, session: Session) -> str:
        if not session.tree_ids:
            raise NoTrees("session has no trees to answer against")
        if len(session.tree_ids) == 1:
            session.active_tree = session.tree_ids[0]
            return session.active_tree
        if self.gateway is None:
            session.active_tree = session.active_tree or session.tree_ids[0]
            return session.active_tree
        signatures = [
            tree_signature(self.trees.get_tree(tid)) for tid in session.tree_ids
        ]
        vectors = self.gateway.embed([question] + signatures)
        q_vec, sig_vecs = vectors[0], vectors[1:]
        scores = [cosine_similarity(q_vec, v) for v in sig_vecs]
        ranked = sorted(zip(scores, session.tree_ids), key=lambda p: -p[0])
        best_score, best_id = ranked[0]
        margin = best_score - ranked[1][0] if len(ranked) > 1 else 1.0
        if margin < self.config.localize_margin and session.active_tree:
            best_id = session.active_tree
        session.active_tree = best_id
        return best_id

    # -- turn handling --------------------------------------------------------

    def _extract_images(self, session: Session,
                        attachments: Sequence[str]) -> Turn:
        extracted: list[str] = []
        assert self.gateway is not None
        for image_id in attachments:
            reply = self.gateway.complete(
                ChatRequest(
                    prompt=(
                        "Extract the table in this image as tab-separated "
                        "rows, one line per row. Output the rows only."
                    ),
                    image=image_id,
                    tag=extract_tag(image_id),
                ),
                kind="vlm",
            )
            grid = parse_grid_reply(reply, image_id)
            tree, report = build_hotree(
                grid, gateway=None, tau=self.build_params.tau, mode="heuristic"
            )
            self.trees.add_tree(tree, report)
            session.tree_ids.append(tree.id)
            session.active_tree = tree.id
            extracted.append(tree.id)
            self._log("agent", "image.extracted", image=image_id,
                      tree_id=tree.id)
        text = f"extracted {len(extracted)} table(s) from image upload"
        ans = Answer(text=text, confidence=1.0, elapsed_ms=0.0)
        return Turn(
            raw_question="",
            resolved_question="(image upload)",
            tree_id=extracted[-1],
            answer=ans,
            routing=RoutingDecision(
                ROUTE_IMAGE_EXTRACTION,
                rationale="attachments present; extraction pipeline engaged",
            ),
            reply=text,
        )

    def _frame_reply(self, resolved: str, ans: Answer) -> str:
        if ans.confidence == 0.0:
            return ans.text
        return f"The answer to \"{resolved}\" is {ans.text}."

    def handle_turn(self, session: Session, question: str,
                    attachments: Optional[Sequence[str]] = None) -> Turn:
        """Run one conversation turn; the turn is appended to the session."""
        started = time.perf_counter()
        self._log("agent", "turn.received", session=session.id,
                  question=question, attachments=list(attachments or []))
        try:
            if attachments:
                turn = self._extract_images(session, attachments)
                turn.raw_question = question
            else:
                turn = self._question_turn(session, question)
        except HotreeError as exc:
            turn = Turn(
                raw_question=question,
                resolved_question=question,
                tree_id=session.active_tree or "",
                answer=Answer(
                    text=f"cannot answer: {exc.message}", confidence=0.0,
                    elapsed_ms=(time.perf_counter() - started) * 1000.0,
                    question=question,
                ),
                routing=RoutingDecision(ROUTE_RETRIEVAL,
                                        rationale=f"failed: {exc.code}"),
                reply=f"cannot answer: {exc.message}",
            )
        session.turns.append(turn)
        self._log("agent", "turn.answered", session=session.id,
                  confidence=turn.answer.confidence, route=turn.routing.route)
        return turn

    def _question_turn(self, session: Session, question: str) -> Turn:
        resolved, warnings = self.resolve_references(question, session)
        if warnings:
            self._log("agent", "references.warnings", warnings=warnings)
        if resolved != question:
            self._log("agent", "references.resolved", resolved=resolved)
        tree_id = self.localize_table(resolved, session)
        self._log("agent", "table.localized", tree_id=tree_id)

        route = ROUTE_AGGREGATION if _AGG_INTENT.search(resolved) \
            else ROUTE_RETRIEVAL
        rationale = ("aggregate intent keywords matched" if
                     route == ROUTE_AGGREGATION else
                     "no aggregate intent detected")
        self._log("agent", "route.assigned", route=route)

        tree = self.trees.get_tree(tree_id)  # always version-latest
        ans = run_answer(resolved, tree, self.decomposer, self.config)

        if route == ROUTE_RETRIEVAL and ans.trace.records and \
                ans.trace.records[-1].op_name in AGG_FINAL_OPS:
            route = ROUTE_AGGREGATION
            rationale = "plan ends in an analytical operation"
        return Turn(
            raw_question=question,
            resolved_question=resolved,
            tree_id=tree_id,
            answer=ans,
            routing=RoutingDecision(route, rationale=rationale),
            reply=self._frame_reply(resolved, ans),
            warnings=warnings,
        )
